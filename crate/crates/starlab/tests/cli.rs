use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use starlab::plan_file::{emit_schedule, parse_schedule};
use starlab::report::{self, Format};
use starlab_core::schedule::{plan_greedy, validate};
use starlab_core::sim::{self, scenario_passes};
use starlab_core::{demo_scenario, link};

fn starlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starlab")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    starlab(args).status.code().expect("exit code")
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(starlab(args).stdout).unwrap()
}

fn demo() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/demo.json").display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["linkbudget", "--band", "l", "--range-km", "1000"]), 2);
    assert_eq!(code(&["passes", "--station", "Atlantis"]), 2);
    assert_eq!(code(&["simulate", "--format", "xml"]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn exit_code_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", "{}");
    let malformed = write(dir.path(), "bad.json", r#"{"platform": {"warp_drive": 1}}"#);
    let broken = write(dir.path(), "broken.json", "{");
    let hot = write(
        dir.path(),
        "hot.json",
        r#"{"experiments": [{"id": "hot", "duration_s": 300, "frontends": ["FE1"], "extra_power_w": 60}]}"#,
    );
    let invalid = write(dir.path(), "invalid.json", r#"{"orbit": {"altitude_km": -5}}"#);

    for cmd in ["schedule", "simulate", "passes"] {
        assert_eq!(code(&[cmd, "--scenario", &good]), 0, "{cmd} good");
        assert_eq!(code(&[cmd, "--scenario", &malformed]), 2, "{cmd} malformed");
        assert_eq!(code(&[cmd, "--scenario", &broken]), 2, "{cmd} broken");
    }
    assert_eq!(code(&["schedule", "--scenario", &hot]), 1);
    assert!(stdout(&["schedule", "--scenario", &hot]).contains("flatsat exceeds-peak-supply"));

    assert_eq!(code(&["validate", &good]), 0);
    assert_eq!(code(&["validate", &good, &invalid]), 1);
    assert_eq!(code(&["validate", &good, &invalid, &malformed, "--jobs", "3"]), 2);
    let out = stdout(&["validate", &invalid, &good, "--jobs", "2"]);
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with(' ')).collect();
    assert!(lines[0].ends_with("FAILED") && lines[1].ends_with("ok"), "{out}");
}

#[test]
fn infeasible_schedule_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let clash = write(
        dir.path(),
        "clash.json",
        r#"{"entries": [
            {"id": "a", "kind": "experiment", "start": "PT0S", "end": "PT600S", "devices": ["Minerva-A/FE1"], "band": "uhf"},
            {"id": "b", "kind": "experiment", "start": "PT300S", "end": "PT900S", "devices": ["Minerva-A/FE2"], "band": "s"}
        ]}"#,
    );
    assert_eq!(code(&["simulate", "--schedule", &clash]), 1);
    assert_eq!(code(&["validate", &demo(), "--schedule", &clash]), 1);
    let out_dir = dir.path().join("forced");
    let out = out_dir.display().to_string();
    assert_eq!(code(&["simulate", "--schedule", &clash, "--force", "--out", &out]), 1);
    let r = report::from_json(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert!(r.events.iter().any(|e| e.kind == starlab_core::sim::EventKind::Violation));
}

#[test]
fn passes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("passes.json");
    assert_eq!(code(&["passes", "--hours", "24", "--out", out.to_str().unwrap()]), 0);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!rows.is_empty());
    for r in &rows {
        assert!(r["min_slant_range_km"].as_f64().unwrap() >= 550.0);
    }

    assert_eq!(code(&["passes", "--hours", "0", "--out", out.to_str().unwrap()]), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().trim(), "[]");
    assert!(stdout(&["passes", "--hours", "0"]).contains("0 pass(es)"));
}

fn field(text: &str, prefix: &str) -> String {
    text.lines().find_map(|l| l.strip_prefix(prefix)).unwrap_or_else(|| panic!("no {prefix:?} in {text}")).to_owned()
}

#[test]
fn linkbudget_examples() {
    let out = stdout(&["linkbudget", "--band", "s", "--range-km", "1000"]);
    let fspl: f64 = field(&out, "FSPL: ").trim_end_matches(" dB").parse().unwrap();
    let oracle = 20.0 * (4.0 * std::f64::consts::PI * 1.0e6 * 2180e6 / 299_792_458.0f64).log10();
    assert!((fspl - 159.1).abs() <= 0.2 && (fspl - oracle).abs() < 0.01, "{fspl}");

    let out = stdout(&["linkbudget", "--band", "ka", "--range-km", "800"]);
    assert_eq!(field(&out, "closed: "), "yes");
    assert_eq!(field(&out, "rate: "), "4.600 Mbit/s");

    assert_eq!(code(&["linkbudget", "--band", "optical-down", "--range-km", "1600"]), 1);
    let out = stdout(&["linkbudget", "--band", "optical-down", "--range-km", "1600"]);
    assert_eq!(field(&out, "limiting factor: "), "range");
    assert_eq!(code(&["linkbudget", "--band", "optical-down", "--range-km", "1500"]), 0);
    assert_eq!(code(&["linkbudget", "--band", "optical-up", "--range-km", "900", "--pointing-deg", "1.5"]), 1);
    assert_eq!(code(&["linkbudget", "--band", "s", "--range-km", "1000", "--required-margin-db", "100"]), 1);
    assert_eq!(code(&["linkbudget", "--band", "s", "--range-km", "0"]), 2);
}

#[test]
fn schedule_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let text = stdout(&["schedule", "--scenario", &demo(), "--out", out.to_str().unwrap()]);
    let s = demo_scenario();
    let passes = scenario_passes(&s);
    let plan = plan_greedy(&s.experiments, &passes, &s);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), emit_schedule(&plan.schedule));
    let min: f64 = field(&text, "min duty cycle: ").parse().unwrap();
    assert!(min >= 0.15, "{text}");
    assert!(validate(&parse_schedule(&emit_schedule(&plan.schedule)).unwrap(), &s, &passes).is_empty());
}

#[test]
fn simulate_matches_library_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run_into = |name: &str, format: &str| -> PathBuf {
        let out = dir.path().join(name);
        let args = ["simulate", "--scenario", &demo(), "--format", format, "--out", out.to_str().unwrap()];
        assert_eq!(code(&args), 0);
        out
    };
    let a = run_into("a", "json");
    let b = run_into("b", "json");
    let ja = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ja, std::fs::read(b.join("report.json")).unwrap());

    let s = demo_scenario();
    let plan = plan_greedy(&s.experiments, &scenario_passes(&s), &s);
    let expected = sim::run(&s, &plan.schedule, false).unwrap();
    assert_eq!(String::from_utf8(ja).unwrap(), report::to_json(&expected));

    let c = run_into("c", "csv");
    for (name, text) in report::emit_report(&expected, Format::Csv) {
        assert_eq!(std::fs::read_to_string(c.join(name)).unwrap(), text);
    }
    let energy = std::fs::read_to_string(c.join("report_energy.csv")).unwrap();
    assert_eq!(energy.lines().next(), Some("t_s,soc_wh,generation_w,load_w"));
    let storage = std::fs::read_to_string(c.join("report_storage.csv")).unwrap();
    assert_eq!(storage.lines().next(), Some("t_s,used_bits,produced_bits,downlinked_bits,dropped_bits"));
}

#[test]
fn seed_flag_reaches_the_digest() {
    let a = field(&stdout(&["simulate", "--seed", "1"]), "scenario ");
    let b = field(&stdout(&["simulate", "--seed", "2"]), "scenario ");
    assert_ne!(a, b);
    assert_eq!(a, field(&stdout(&["simulate", "--seed", "1"]), "scenario "));
}

#[test]
fn fspl_oracle_consistency() {
    // The binary reports the same loss as the library at the TTC frequency.
    let out = stdout(&["linkbudget", "--band", "ttc", "--range-km", "1500"]);
    let fspl: f64 = field(&out, "FSPL: ").trim_end_matches(" dB").parse().unwrap();
    assert!((fspl - link::fspl_db(2.2e9, 1500.0).unwrap()).abs() < 0.005);
}
