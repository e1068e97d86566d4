use std::io::Write;
use std::process::{Command, Output};

use mforge::catalog;
use mforge::expr::{zero_test, ZeroTestConfig};
use mforge::multiplier::{integral_from_ratio, verify_multiplier};
use serde_json::Value;

fn mforge(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mforge"));
    cmd.args(args).env_remove("MFORGE_SEED");
    if let Some(s) = seed {
        cmd.env("MFORGE_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["verdicts"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}: {r}"))
}

fn config(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".ini").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn oscillator_multiplier_is_verified() {
    let out = mforge(&["verify-multiplier", "--system", "oscillator1", "--mu", "1/(1+k*x^2)"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(check(&r, "mu: multiplier condition")["detail"]["verdict"], "zero");
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));
}

#[test]
fn ratio_of_multipliers_gives_the_second_integral() {
    let out = mforge(
        &["derive-integral", "--system", "oscillator2", "--mu1", "1+k*x^2", "--mu2", "k*(1+k*x^2)^2*v^2-a^2"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let s = catalog::system("oscillator2", 1.0, 1.0).unwrap();
    let got = s.expr(r["expressions"]["integral"].as_str().unwrap()).unwrap();
    let printed = s.expr("(k*(1+k*x^2)^2*v^2 - a^2)/(1+k*x^2)").unwrap();
    let d = zero_test(&(got.recip() - printed), &s.domain, &s.params, &ZeroTestConfig::default()).unwrap();
    assert!(d.is_zero(), "{d:?}");
}

#[test]
fn nonlocal_symmetry_of_the_first_oscillator() {
    let out = mforge(&["nonlocal", "--system", "oscillator1", "--h", "1/v"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["expressions"]["g"], "exp(w)/v");
    for c in ["dt", "dx", "dv", "dw"] {
        assert_eq!(check(&r, &format!("[Y, X̄_H] {c}"))["passed"], true);
    }
}

#[test]
fn exit_codes() {
    let fail = mforge(&["verify-multiplier", "--system", "oscillator1", "--mu", "1+x^2"], None);
    assert_eq!(fail.status.code(), Some(1));
    assert!(!report(&fail)["witnesses"].as_array().unwrap().is_empty());

    let bad_expr = mforge(&["verify-multiplier", "--system", "oscillator1", "--mu", "1/(1+"], None);
    assert_eq!(bad_expr.status.code(), Some(2));
    assert!(report(&bad_expr)["error"].is_string());

    let cfg = config("[system\nname = oscillator1\n");
    let bad_file = mforge(&["catalog", "--config", cfg.path().to_str().unwrap()], None);
    assert_eq!(bad_file.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let cfg = config(
        "# quartic damping-free oscillator\n\
         [system]\n\
         name = custom\n\
         f = \"-x - x^3\"\n\
         [domain]\n\
         x = [-1, 1]\n\
         v = [-1, 1]\n\
         [task]\n\
         integral = \"v^2/2 + x^2/2 + x^4/4\"  # energy\n",
    );
    let path = cfg.path().to_str().unwrap();
    let ok = mforge(&["verify-integral", "--config", path], None);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert_eq!(report(&ok)["system"]["F"], "-x - x^3");

    let overridden = mforge(&["verify-integral", "--config", path, "--integral", "v^2/2 + x^2/2"], None);
    assert_eq!(overridden.status.code(), Some(1));
    assert_eq!(report(&overridden)["inputs"]["integral"], "v^2/2 + x^2/2");
}

#[test]
fn seed_comes_from_flag_then_environment_then_default() {
    let args = ["verify-multiplier", "--system", "oscillator1", "--mu", "1/(1+k*x^2)"];
    assert_eq!(report(&mforge(&args, None))["seed"], 0x5EED);
    assert_eq!(report(&mforge(&args, Some("77")))["seed"], 77);
    let mut flagged = args.to_vec();
    flagged.extend(["--seed", "0x10"]);
    assert_eq!(report(&mforge(&flagged, Some("77")))["seed"], 16);
    assert_eq!(mforge(&args, Some("seventy")).status.code(), Some(2));
}

#[test]
fn simulate_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = mforge(
        &[
            "simulate", "--system", "harmonic", "--quantity", "v^2/2 + a^2*x^2/2", "--t-end", "2", "--step", "0.01",
            "--x0", "1", "--csv", csv.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,v,Q"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 201);
    let last = rows.last().unwrap();
    assert!((last[0] - 2.0).abs() < 1e-12);
    assert!((last[1] - 2f64.cos()).abs() < 1e-8, "{last:?}");
}

#[test]
fn commands_are_thin_adapters_over_the_library() {
    for seed in [1u64, 0x5EED, 987_654_321] {
        let seed_text = seed.to_string();
        let out = mforge(
            &[
                "derive-integral", "--system", "oscillator1", "--mu1", "1/(1+k*x^2)", "--mu2", "1/(k*v^2-a^2)",
                "--param", "k=0.5", "--seed", &seed_text,
            ],
            None,
        );
        let r = report(&out);

        let s = catalog::system("oscillator1", 0.5, 1.0).unwrap();
        let z = ZeroTestConfig::default().with_seed(seed);
        let m1 = verify_multiplier(&s, &s.expr("1/(1+k*x^2)").unwrap(), None, &z).unwrap();
        let m2 = verify_multiplier(&s, &s.expr("1/(k*v^2-a^2)").unwrap(), None, &z).unwrap();
        let fi = integral_from_ratio(&m1, &m2, &s, &z).unwrap();

        assert_eq!(check(&r, "mu1: multiplier condition")["detail"], serde_json::to_value(&m1.residual_verdict).unwrap());
        assert_eq!(check(&r, "mu2: non-vanishing")["detail"], serde_json::to_value(&m2.certificate).unwrap());
        assert_eq!(check(&r, "integral: conservation")["detail"], serde_json::to_value(&fi.verdict).unwrap());
        assert_eq!(r["expressions"]["integral"], fi.expr.to_string());
        assert_eq!(r["passed"], true);
    }
}

#[test]
fn catalog_listing_flags_printed_forms() {
    let out = mforge(&["catalog", "--system", "oscillator2"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let flags = report(&out)["flags"].as_array().unwrap().clone();
    assert!(flags.iter().any(|f| f.as_str().unwrap().starts_with("unverified-print")), "{flags:?}");
}
