use std::fs;
use std::path::PathBuf;

use heliquad::logcsv::{export_csv, import_csv};
use heliquad::mission::parse_mission;
use heliquad::model::{read_model, write_model};
use heliquad::FormatError;
use heliquad_core::harness::{failure_mission, flip_mission, hover_mission, three_actuator_mission, LogRecord, LOG_COLUMNS};
use heliquad_core::nn::{train_mlp, Dataset, TrainConfig};

fn record(i: usize) -> LogRecord {
    let t = i as f64 * 1e-3;
    let s = (t * 7.3).sin();
    LogRecord {
        t,
        position: [s, t.cos(), 3.0 + 1e-9 * i as f64],
        velocity: [1.0 / (i as f64 + 3.0), -s, 0.0],
        euler: [std::f64::consts::PI * s, 0.01 * s, t],
        rate: [s * s, -1e-12, 2.5],
        roll_d: 0.1,
        pitch_d: -0.1,
        yaw_rate_d: 0.3490658503988659,
        rate_d: [0.5, 0.25, 0.125],
        moment: [1e-5 * s, 2e-5, -3e-5],
        thrust: 6.14106,
        omega_cmd: [700.0 + s, 701.0, 702.0, 0.0],
        omega_act: [699.9, 700.9, 701.9, 0.0],
        gamma_cmd: [0.20943951023931953, -0.03, 0.2094, 0.1],
        zeta_servo: [1633.33, 1466.7, 1633.3, 1555.5],
        zeta_motor: [1445.6, 1446.0, 1447.0, 1000.0],
        sigma: i % 3 == 0,
        mu: (i % 5) as u8,
    }
}

#[test]
fn ten_thousand_records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    let recs: Vec<LogRecord> = (0..10_000).map(record).collect();
    export_csv(&recs, &path).unwrap();
    let back = import_csv(&path).unwrap();
    assert_eq!(back.len(), recs.len());
    for (a, b) in recs.iter().zip(&back) {
        assert_eq!(a.to_row().map(f64::to_bits), b.to_row().map(f64::to_bits));
    }
}

#[test]
fn truncated_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    export_csv(&(0..20).map(record).collect::<Vec<_>>(), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();

    // Cut inside the last record: fewer fields on line 21.
    let cut = text.len() - text.lines().last().unwrap().len() / 2 - 1;
    fs::write(&path, &text[..cut]).unwrap();
    let e = import_csv(&path).unwrap_err();
    assert!(matches!(e, FormatError::Line { line: 21, .. }), "{e}");
    assert!(e.to_string().starts_with("line 21"));

    // Cut only the final characters of the last field.
    fs::write(&path, &text[..text.len() - 2]).unwrap();
    let e = import_csv(&path).unwrap_err();
    assert!(matches!(e, FormatError::Line { line: 21, .. }), "{e}");
}

#[test]
fn empty_log_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    export_csv(&[], &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("{}\n", LOG_COLUMNS.join(",")));
    assert!(import_csv(&path).unwrap().is_empty());
}

#[test]
fn trained_model_round_trips_through_file() {
    let mut d = Dataset::new(2, 2);
    for i in 0..120 {
        let (x, y) = (i as f64 / 12.0, (i % 7) as f64);
        d.push(&[x, y], &[x.sin() + y, 0.5 * x * y]);
    }
    let (m, _) = train_mlp(&d, &TrainConfig { epochs: 300, ..TrainConfig::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nn.txt");
    write_model(fs::File::create(&path).unwrap(), &m).unwrap();
    let back = read_model(std::io::BufReader::new(fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.predict(&[1.3, 4.0]).outputs, m.predict(&[1.3, 4.0]).outputs);
}

#[test]
fn shipped_missions_match_presets() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../missions");
    let read = |name: &str| parse_mission(&fs::read_to_string(dir.join(name)).unwrap()).unwrap();
    assert_eq!(read("hover.mission"), hover_mission(10.0));
    assert_eq!(read("flip.mission"), flip_mission());
    assert_eq!(read("three_actuator.mission"), three_actuator_mission());
    assert_eq!(read("failure.mission"), failure_mission());
}
