use std::fs;

use fwsparse_cli::io::{
    load_dictionary, load_instance_file, save_dictionary, save_json, trace_to_csv, InstanceFile,
    TRACE_HEADER,
};
use fwsparse_cli::HarnessError;
use fwsparse_core::instances::{
    build_identity_hadamard, build_random_unit, sample_instance, CoeffRange, GENERATOR_NAME,
};
use fwsparse_core::solvers::{fw_solve, SolverConfig};

#[test]
fn dictionary_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dict.txt");
    let dict = build_random_unit(8, 16, 1).unwrap();
    save_dictionary(&dict, &path).unwrap();
    let back = load_dictionary(&path).unwrap();
    for j in 0..16 {
        for (a, b) in dict.atom(j).iter().zip(back.atom(j)) {
            assert!((a - b).abs() <= 1e-15);
        }
    }
    let header = fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("8 16\n"));
}

#[test]
fn missing_file_names_the_path() {
    let err = load_dictionary(std::path::Path::new("/nonexistent/dict.txt")).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/dict.txt"));
}

#[test]
fn instance_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("instance.json");
    let dict = build_identity_hadamard(16).unwrap();
    let inst = sample_instance(&dict, 3, CoeffRange::default(), 9).unwrap();
    let file = InstanceFile::from_instance(&dict, &inst, GENERATOR_NAME, 9);
    save_json(&file, &path).unwrap();

    let loaded = load_instance_file(&path).unwrap();
    assert_eq!(loaded, file);
    let rebuilt = loaded.to_instance(&dict, &path).unwrap();
    assert_eq!(rebuilt, inst);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    for key in [
        "d",
        "n",
        "m",
        "support",
        "x_star_values",
        "generator",
        "seed",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn instance_against_wrong_dictionary_is_rejected() {
    let dict = build_identity_hadamard(16).unwrap();
    let inst = sample_instance(&dict, 2, CoeffRange::default(), 1).unwrap();
    let file = InstanceFile::from_instance(&dict, &inst, GENERATOR_NAME, 1);
    let other = build_identity_hadamard(8).unwrap();
    assert!(file
        .to_instance(&other, std::path::Path::new("i.json"))
        .is_err());

    let mut bad = file.clone();
    bad.support = vec![3, 1];
    assert!(bad
        .to_instance(&dict, std::path::Path::new("i.json"))
        .is_err());
}

#[test]
fn trace_csv_columns_parse_back() {
    let dict = build_identity_hadamard(16).unwrap();
    let inst = sample_instance(&dict, 3, CoeffRange::default(), 4).unwrap();
    let res = fw_solve(
        &dict,
        &inst.y,
        &SolverConfig::frank_wolfe(2.0 * inst.x_star_l1),
        Some(&inst),
    )
    .unwrap();
    let csv = trace_to_csv(&res);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), res.iterations());
    for (row, rec) in rows.iter().zip(&res.trace) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 6);
        assert_eq!(cols[0].parse::<usize>().unwrap(), rec.k);
        assert_eq!(cols[1].parse::<usize>().unwrap(), rec.selected_atom);
        let residual: f64 = cols[3].parse().unwrap();
        assert!((residual - rec.residual_norm).abs() <= 1e-11 * rec.residual_norm.max(1e-300));
        assert_eq!(cols[5], "true");
    }
}
