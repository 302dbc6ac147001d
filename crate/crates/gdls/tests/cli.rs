use std::path::Path;
use std::process::{Command, Output};

fn gdls(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdls"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Data rows of a CSV, skipping `#` metadata and the header line.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn estimate_writes_result_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = gdls(dir.path(), &["estimate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let est = read(dir.path(), "estimate.csv");
    assert!(est.starts_with("# gdls 0.1.0\n# command = estimate\n# seed = 1\n"));
    assert!(est.contains("\nindex,frequency,amplitude_re,amplitude_im\n"));
    assert!(!est.contains('\r'));
    assert_eq!(rows(&est).len(), 4);
    let traj = read(dir.path(), "estimate_trajectory.csv");
    assert!(traj.contains("\niteration,cost\n"));
    let costs: Vec<f64> = rows(&traj).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(costs.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn estimate_reads_a_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.txt");
    // one tone at 0.25: a_k = j^k
    let text: String = (0..8)
        .map(|k| match k % 4 {
            0 => "1,0\n",
            1 => "0 1\n",
            2 => "-1,0\n",
            _ => "0,-1\n",
        })
        .collect();
    std::fs::write(&input, text).unwrap();
    let out = gdls(dir.path(), &["--sparsity", "1", "estimate", "--input", input.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let r = rows(&read(dir.path(), "estimate.csv"));
    let f: f64 = r[0][1].parse().unwrap();
    assert!((f - 0.25).abs() < 1e-9, "{f}");
}

#[test]
fn bench_commands_emit_series() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str, usize); 4] = [
        (&["bench", "mse-snr", "--snr-list", "10,30", "--trials", "4"], "mse_snr.csv", 2 * 5),
        (&["bench", "resolution", "--separations", "0.05,0.1", "--trials", "4"], "resolution.csv", 2 * 4),
        (&["bench", "amplitude", "--stds", "0,2", "--trials", "4"], "amplitude_random.csv", 2 * 4),
        (&["bench", "runtime", "--sizes", "16,24", "--trials", "2"], "runtime.csv", 2 * 4),
    ];
    for (args, file, expected) in cases {
        let out = gdls(dir.path(), args);
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
        let text = read(dir.path(), file);
        assert!(text.contains("\nswept_value,method,metric,trials,stderr\n"), "{file}");
        assert_eq!(rows(&text).len(), expected, "{file}");
    }
}

#[test]
fn tomosar_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sim = gdls(d, &["tomosar", "simulate", "--rows", "8", "--cols", "2"]);
    assert!(sim.status.success(), "{}", stderr(&sim));
    for m in ["gdls", "omp"] {
        let inv = gdls(d, &["tomosar", "invert", "--method", m]);
        assert!(inv.status.success(), "{}", stderr(&inv));
        let report = read(d, &format!("invert_{m}_report.txt"));
        assert!(report.contains("cells = 16\n"));
        assert!(!report.contains("building_height_m"));
        let cloud = format!("cloud_{m}.csv");
        assert!(read(d, &format!("cloud_{m}.ply")).starts_with("ply\n"));
        let score = gdls(d, &["tomosar", "score", "--cloud", d.join(&cloud).to_str().unwrap()]);
        assert!(score.status.success(), "{}", stderr(&score));
        let text = read(d, &format!("cloud_{m}_score.txt"));
        let rmse: f64 = text
            .lines()
            .find_map(|l| l.strip_prefix("rmse_m = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(rmse.is_finite() && rmse >= 0.0);
    }
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# test\nsnr_db = 30\nseed = 7\n").unwrap();
    let c = cfg.to_str().unwrap();
    let out = gdls(dir.path(), &["--config", c, "--snr-db", "40", "estimate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let est = read(dir.path(), "estimate.csv");
    assert!(est.contains("# seed = 7\n"));
    assert!(est.contains("# config.snr_db = 40\n"));

    std::fs::write(&cfg, "snr = 30\n").unwrap();
    let out = gdls(dir.path(), &["--config", c, "estimate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown key `snr`"));
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let help = gdls(d, &["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert_eq!(gdls(d, &["--bogus"]).status.code(), Some(1));
    assert_eq!(gdls(d, &["bench", "mse-snr", "--trials", "many"]).status.code(), Some(1));

    let missing = gdls(d, &["tomosar", "invert", "--stack", d.join("absent.bin").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("absent.bin"));

    let tall = gdls(d, &["tomosar", "simulate", "--height-m", "70", "--rows", "4", "--cols", "1"]);
    assert_eq!(tall.status.code(), Some(1));
    assert!(stderr(&tall).contains("ambiguity span"));
    assert!(!d.join("stack.bin").exists());

    let dense = gdls(d, &["--sparsity", "16", "estimate"]);
    assert_eq!(dense.status.code(), Some(1));
    assert!(stderr(&dense).contains("sparsity 16 violates the bound L <= N - 1 for N = 16"));

    let empty = d.join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = gdls(d, &["estimate", "--input", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("empty input"));

    let garbled = d.join("garbled.csv");
    std::fs::write(&garbled, "1,0\n1,zero\n").unwrap();
    let out = gdls(d, &["estimate", "--input", garbled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("garbled.csv:2"), "{}", stderr(&out));
}
