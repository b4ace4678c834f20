//! Files consumed by downstream plotting: field files, records CSV, summary JSON, config text.

use proptest::prelude::*;
use torus_euler::builtin;
use torus_euler::experiments::{
    log_log_slope, read_records_csv, summarize, write_records_csv, Construction, ExperimentConfig,
    ExperimentRecord, FieldSource, NonuniformSummary, RECORDS_HEADER,
};
use torus_euler::solver::Diagnostics;
use torus_euler::spectral::io::{self, FieldData};
use torus_euler::spectral::random;
use torus_euler::{Grid, ScalarField};

fn record(n: usize, ratio: f64) -> ExperimentRecord {
    ExperimentRecord {
        n,
        big_n: 128 * n,
        input_distance: 1.0 / n as f64,
        output_distance: ratio / n as f64,
        vorticity_distance: 0.5 * ratio / n as f64,
        ratio,
        particle_separation: 1.0 / n as f64,
        separation_bound: 0.5 / n as f64,
        supports_disjoint: n % 2 == 0,
    }
}

#[test]
fn field_file_layout() {
    let g = Grid::new(8).unwrap();
    let f = ScalarField::from_fn(g, |x, y| x + 10.0 * y);
    let mut bytes = Vec::new();
    io::write_field(&mut bytes, &FieldData::Scalar(f.clone())).unwrap();
    let header = br#"{"type":"scalar","n":8,"version":1}"#;
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes[header.len()], b'\n');
    let body = &bytes[header.len() + 1..];
    assert_eq!(body.len(), 8 * 64);
    // Row-major with axis 0 = x1: the second value is node (0, 1).
    let second = f64::from_le_bytes(body[8..16].try_into().unwrap());
    assert_eq!(second, f.values()[[0, 1]]);
}

#[test]
fn vector_files_load_as_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.field");
    let g = Grid::new(16).unwrap();
    let u = builtin::taylor_green(g);
    io::save(&path, &FieldData::Vector(u.clone())).unwrap();
    let src = FieldSource::parse(path.to_str().unwrap());
    assert_eq!(src.load(g, 0).unwrap(), u);
    let fine = src.load(Grid::new(32).unwrap(), 0).unwrap();
    assert!((fine.max_norm() - u.max_norm()).abs() < 1e-12);
    assert!(io::load(&path).unwrap().into_scalar().is_err());
}

#[test]
fn records_csv_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    let recs: Vec<_> = [1, 2, 4, 8]
        .iter()
        .map(|&n| record(n, 0.7 * n as f64))
        .collect();
    write_records_csv(&path, &recs).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some(RECORDS_HEADER));
    assert_eq!(read_records_csv(&path).unwrap(), recs);
}

#[test]
fn summary_slope_is_recomputable_from_records() {
    let g = Grid::new(8).unwrap();
    let w = random::random_solenoidal(g, 2.0, 1.0, &mut random::rng(0, 0));
    let witness = torus_euler::construction::Witness {
        u_base: w.scaled(0.0),
        w_star: w,
        x_star: [0.0, 0.0],
        m: 1.0,
        epsilon_fd: 1e-3,
        m_half: 1.0,
    };
    let constants = torus_euler::construction::EstimatedConstants {
        c1: 1.5,
        c2: 1.5,
        c1_empirical: 1.0,
        c2_empirical: 1.0,
        sample_count: 5,
        radius: 0.1,
    };
    let c = Construction {
        unit_witness: witness.clone(),
        witness,
        constants,
        scale: 1.0,
        r1: 0.5,
        r: 2.0,
        k: Default::default(),
    };
    let recs: Vec<_> = [1, 2, 4, 8]
        .iter()
        .map(|&n| record(n, 1.3 * (n as f64).powf(0.8)))
        .collect();
    let null: Vec<_> = [1, 2, 4, 8].iter().map(|&n| record(n, 1.0)).collect();
    let summary = summarize(&c, &recs, &null, Vec::new());
    let json = serde_json::to_string(&summary).unwrap();
    let back: NonuniformSummary = serde_json::from_str(&json).unwrap();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    for key in [
        "slope",
        "pass",
        "trend_pass",
        "null_pass",
        "caveat",
        "R",
        "m",
        "x_star",
    ] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    let x: Vec<f64> = recs.iter().map(|r| r.n as f64).collect();
    let y: Vec<f64> = recs.iter().map(|r| r.ratio).collect();
    assert!((log_log_slope(&x, &y) - back.slope).abs() < 1e-6);
    assert!((back.slope - 0.8).abs() < 1e-12 && back.pass);
}

#[test]
fn diagnostics_header() {
    assert_eq!(Diagnostics::CSV_HEADER, "t,energy,enstrophy,h3norm,courant");
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.cfg");
    std::fs::write(&path, "# trend run\nR = auto\nk = 3\nn_list = 1,2,4,8\nbase = builtin:zero\nseed = 5\nout_dir = out/trend\n")
        .unwrap();
    let cfg = ExperimentConfig::from_file(&path).unwrap();
    assert_eq!(cfg.seed, 5);
    assert_eq!(cfg.out_dir, std::path::PathBuf::from("out/trend"));
    assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
}

proptest! {
    #[test]
    fn record_csv_round_trips(ratios in prop::collection::vec(0.0f64..1e6, 1..6)) {
        let recs: Vec<_> = ratios.iter().enumerate().map(|(i, &r)| record(i + 1, r)).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_records_csv(&path, &recs).unwrap();
        prop_assert_eq!(read_records_csv(&path).unwrap(), recs);
    }

    #[test]
    fn field_files_round_trip(seed in any::<u64>(), n in prop::sample::select(vec![8usize, 16])) {
        let g = Grid::new(n).unwrap();
        let u = random::random_solenoidal(g, 4.0, 1.0, &mut random::rng(seed, 0));
        let mut bytes = Vec::new();
        io::write_field(&mut bytes, &FieldData::Vector(u.clone())).unwrap();
        let back = io::read_field(&mut bytes.as_slice()).unwrap().into_vector().unwrap();
        prop_assert_eq!(back, u);
    }
}
