use std::path::PathBuf;

use relaywalk::experiment::{execute, ExperimentConfig, Mode};

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(name)).unwrap()
}

fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn constant_grid_argmin_column() {
    let cfg = load("fig3.cfg");
    let (header, data) = rows(&execute(&cfg, Mode::Simulate).unwrap().csv);
    let (k, argmin) = (column(&header, "k"), column(&header, "argmin_n"));
    let k4: Vec<_> = data.iter().filter(|r| r[k] == "4").collect();
    assert_eq!(k4.len(), 7);
    assert!(k4.iter().all(|r| r[argmin] == "6"));
    let rel = column(&header, "rel_err");
    assert!(data.iter().all(|r| r[rel].parse::<f64>().unwrap().abs() < 0.1));
}

#[test]
fn random_grid_analytic_optimum() {
    let cfg = load("fig4.cfg");
    let (header, data) = rows(&execute(&cfg, Mode::Analytic).unwrap().csv);
    let (k, opt) = (column(&header, "k"), column(&header, "optimal_n"));
    assert!(data.iter().filter(|r| r[k] == "4").all(|r| r[opt] == "5"));
}

#[test]
fn constant_patrolling_rows_identical() {
    let cfg = load("fig5.cfg");
    let (_, data) = rows(&execute(&cfg, Mode::Sweep).unwrap().csv);
    let (min, max): (Vec<_>, Vec<_>) = data.iter().partition(|r| r[0] == "min-delay");
    assert_eq!(min.len(), max.len());
    for (a, b) in min.iter().zip(&max) {
        assert_eq!(a[1..], b[1..]);
    }
}

#[test]
fn linear_patrolling_frontier_mixes_strategies() {
    let cfg = load("fig6.cfg");
    let (header, data) = rows(&execute(&cfg, Mode::Sweep).unwrap().csv);
    let flag = column(&header, "pareto_flag");
    let front: Vec<_> = data.iter().filter(|r| r[flag] == "true").collect();
    assert!(front.iter().any(|r| r[0] == "min-delay"));
    assert!(front.iter().any(|r| r[0] == "max-prob"));
}

#[test]
fn surveillance_low_rate_optima_reported() {
    // For n ≥ 7 the delay-optimal k is 2 under either window; the
    // covertness-optimal k sits at 4 or 5 depending on n and the window.
    for name in ["fig7_right_w30.cfg", "fig7_right_w100.cfg"] {
        let cfg = load(name);
        let (_, data) = rows(&execute(&cfg, Mode::Sweep).unwrap().csv);
        for r in data.iter().filter(|r| r[1].parse::<usize>().unwrap() >= 7) {
            let k: usize = r[2].parse().unwrap();
            match r[0].as_str() {
                "min-delay" => assert_eq!(k, 2, "{name}: {r:?}"),
                _ => assert!((4..=5).contains(&k), "{name}: {r:?}"),
            }
        }
    }
}
