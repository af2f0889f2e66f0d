#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Days, NaiveDate};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_adaptive-qec")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn adaptive-qec")
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn adaptive-qec")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn first_day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 2, 1).unwrap()
}

/// Writes one `<device>_<date>.csv` per day. `errors[day][qubit]` is the
/// Pauli-X error; each qubit also gets a CNOT link to its successor.
pub fn write_series(dir: &Path, device: &str, errors: &[Vec<f64>]) -> Vec<PathBuf> {
    std::fs::create_dir_all(dir).unwrap();
    errors
        .iter()
        .enumerate()
        .map(|(day, row)| {
            let date = first_day() + Days::new(day as u64);
            let mut text = String::from("Qubit,Pauli-X error ,CNOT error \n");
            for (q, p) in row.iter().enumerate() {
                let link = if q + 1 < row.len() {
                    format!("{}_{}:{}", q, q + 1, 0.01 + 0.001 * day as f64)
                } else {
                    String::new()
                };
                text.push_str(&format!("{q},{p},{link}\n"));
            }
            let path = dir.join(format!("{device}_{date}.csv"));
            std::fs::write(&path, text).unwrap();
            path
        })
        .collect()
}

/// 127 qubits per day: `fast` qubits in the d=7 band, `mid` in the d=9 band,
/// the rest needing d=13. The values vary slightly from day to day.
pub fn banded_day(day: usize, fast: usize, mid: usize) -> Vec<f64> {
    (0..127)
        .map(|q| {
            let wiggle = ((q * 7 + day * 3) % 10) as f64;
            if q < fast {
                2e-4 + 4e-5 * wiggle
            } else if q < fast + mid {
                7.5e-4 + 2e-5 * wiggle
            } else {
                3e-3 + 3e-4 * wiggle
            }
        })
        .collect()
}

pub fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}
