//! Subcommand implementations. Each returns the text it prints on success.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use adaptive_qec_core::{
    baseline_distance, compare_overhead, crossing_point, fit_model, plan_day, usable_fraction,
    AssignmentPolicy, CalibrationSeries, FleetPlan, RotatedSurfaceLayout, ThresholdSource,
    ThresholdTable, MAX_PLANNING_DISTANCE,
};
use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDate;

use crate::cli::{
    Command, FitArgs, IngestArgs, InvariantViolation, PlanArgs, ReportArgs, RerunArgs, SweepArgs,
};
use crate::manifest::{InputDigest, RunManifest, MANIFEST_FILE};
use crate::{drift, formats, ingest, parallel};

pub fn run(command: Command) -> Result<String> {
    match command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Plan(args) => cmd_plan(args),
        Command::Report(args) => cmd_report(args),
        Command::Rerun(args) => cmd_rerun(args),
    }
}

/// Collects files written under one output directory.
struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(self, command: Command, inputs: Vec<InputDigest>) -> Result<()> {
        let manifest = RunManifest::new(command, inputs, self.written);
        let path = self.root.join(MANIFEST_FILE);
        std::fs::write(&path, formats::to_json(&manifest))
            .with_context(|| format!("writing {}", path.display()))
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Calibration input: a series JSON, one CSV, or a directory of dated CSVs.
fn load_calibration(
    input: &Path,
    date: Option<NaiveDate>,
    device: Option<&str>,
) -> Result<(
    CalibrationSeries,
    Vec<ingest::IngestWarning>,
    Vec<InputDigest>,
)> {
    if !input.exists() {
        bail!("input path {} does not exist", input.display());
    }
    if input.is_file() && input.extension().is_some_and(|e| e == "json") {
        let series = formats::parse_series_json(&read_text(input)?)
            .with_context(|| format!("loading {}", input.display()))?;
        return Ok((series, Vec::new(), vec![InputDigest::of(input)?]));
    }

    let files: Vec<PathBuf> = if input.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(input)
            .with_context(|| format!("listing {}", input.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        files.retain(|p| p.extension().is_some_and(|e| e == "csv"));
        files.sort();
        if files.is_empty() {
            bail!("no .csv files in {}", input.display());
        }
        files
    } else {
        vec![input.to_path_buf()]
    };

    let mut inputs = Vec::with_capacity(files.len());
    let mut device_name = device.map(str::to_string);
    for file in &files {
        let named = ingest::parse_file_name(file);
        let day = match (&named, date, files.len()) {
            (_, Some(d), 1) => d,
            (Some((_, d)), _, _) => *d,
            _ => bail!(
                "cannot tell the date of {}: name it <device>_YYYY-MM-DD.csv or pass --date",
                file.display()
            ),
        };
        if device_name.is_none() {
            device_name = named.map(|(dev, _)| dev).filter(|d| !d.is_empty());
        }
        inputs.push((read_text(file)?, day));
    }
    let device_name = device_name.unwrap_or_else(|| "unknown".to_string());
    let (series, warnings) = ingest::load_series(&device_name, &inputs).map_err(|err| {
        // name the offending file for row-level errors
        let which = match &err {
            ingest::IngestError::MalformedRow { .. }
            | ingest::IngestError::DuplicateQubit { .. }
            | ingest::IngestError::MissingColumn(_) => files
                .iter()
                .zip(&inputs)
                .find(|(_, (raw, d))| ingest::parse_snapshot(raw, &device_name, *d).is_err())
                .map(|(f, _)| format!("{}: ", f.display())),
            _ => None,
        };
        anyhow!("{}{err}", which.unwrap_or_default())
    })?;
    let digests = files
        .iter()
        .map(|f| InputDigest::of(f))
        .collect::<Result<_>>()?;
    Ok((series, warnings, digests))
}

fn cmd_ingest(args: IngestArgs) -> Result<String> {
    let (series, warnings, inputs) =
        load_calibration(&args.input, args.date, args.device.as_deref())?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let summaries = drift::summarize(&series);

    let mut out = OutputDir::create(&args.out)?;
    out.write("series.json", &formats::series_json(&series))?;
    out.write(
        "pauli_x_timeseries.csv",
        &formats::pauli_x_timeseries_csv(&series),
    )?;
    out.write(
        "cnot_timeseries.csv",
        &formats::cnot_timeseries_csv(&series),
    )?;
    out.write("drift_summary.csv", &formats::drift_csv(&summaries))?;
    out.finish(Command::Ingest(args), inputs)?;

    let mut text = String::new();
    writeln!(
        text,
        "device {}: {} snapshots ({} .. {}), {} qubits, {} links",
        series.device_name,
        series.len(),
        series.dates()[0],
        series.dates()[series.len() - 1],
        series.qubit_indices().len(),
        series.link_endpoints().len()
    )?;
    let crossing: Vec<String> = summaries
        .iter()
        .filter(|s| s.crosses_reference)
        .map(|s| s.qubit.to_string())
        .collect();
    writeln!(
        text,
        "qubits crossing the {:e} reference: {}",
        drift::REFERENCE_LEVEL,
        if crossing.is_empty() {
            "none".to_string()
        } else {
            crossing.join(", ")
        }
    )?;
    Ok(text)
}

fn cmd_sweep(args: SweepArgs) -> Result<String> {
    if args.distances.is_empty() || args.p_grid.is_empty() {
        bail!("sweep needs at least one distance and one error rate");
    }
    let table = parallel::with_threads(args.threads, || {
        parallel::sweep(&args.distances, &args.p_grid, args.shots, args.seed)
    })?;

    let mut out = OutputDir::create(&args.out)?;
    out.write("sweep.csv", &formats::sweep_csv(&table))?;
    out.write("sweep_plot.csv", &formats::sweep_plot_csv(&table))?;
    if args.dump_layouts {
        let mut distances = args.distances.clone();
        distances.sort_unstable();
        distances.dedup();
        for d in distances {
            let layout = RotatedSurfaceLayout::new(d)?;
            out.write(&format!("layout_d{d}.json"), &formats::layout_json(&layout))?;
        }
    }

    let mut text = String::new();
    for row in &table.rows {
        let e = &row.estimate;
        writeln!(
            text,
            "d={:<2} p={:<8} p_L={:.3e} [{:.3e}, {:.3e}] ({} / {} shots{})",
            row.distance,
            row.p,
            e.point_estimate,
            e.ci_low,
            e.ci_high,
            e.failures,
            e.shots,
            if e.saturated > 0 {
                format!(", {} saturated", e.saturated)
            } else {
                String::new()
            }
        )?;
    }
    let mut distances = args.distances.clone();
    distances.sort_unstable();
    distances.dedup();
    for pair in distances.windows(2) {
        if let Some(p) = crossing_point(&table, pair[0], pair[1]) {
            writeln!(
                text,
                "d={}/d={} curves cross near p = {p:.4}",
                pair[0], pair[1]
            )?;
        }
    }
    out.finish(Command::Sweep(args), Vec::new())?;
    Ok(text)
}

fn planning_distances() -> Vec<u32> {
    (3..=MAX_PLANNING_DISTANCE).step_by(2).collect()
}

fn cmd_fit(args: FitArgs) -> Result<String> {
    let sweep = formats::parse_sweep_csv(&read_text(&args.input)?)
        .with_context(|| format!("loading {}", args.input.display()))?;
    let fit = fit_model(&sweep)?;
    let table = ThresholdTable::from_model(&fit.model, &planning_distances(), args.target)?;

    let mut out = OutputDir::create(&args.out)?;
    out.write(
        "model.json",
        &formats::to_json(&formats::ModelFile::new(&fit, args.target, &table)),
    )?;
    out.write("threshold_table.csv", &formats::threshold_table_csv(&table))?;
    let inputs = vec![InputDigest::of(&args.input)?];

    let mut text = String::new();
    writeln!(
        text,
        "alpha = {:.6e}, p_th = {:.6e} (rms {:.3e}, {} rows used, {} zero-failure rows dropped)",
        fit.model.alpha, fit.model.p_threshold, fit.residual_rms, fit.used_rows, fit.dropped_rows
    )?;
    writeln!(text, "max physical error for p_L <= {:e}:", args.target)?;
    for (d, p) in table.entries() {
        writeln!(text, "  d={d:<2} p_max={p:.4e}")?;
    }
    out.finish(Command::Fit(args), inputs)?;
    Ok(text)
}

fn load_source(path: Option<&Path>) -> Result<(ThresholdSource, Vec<InputDigest>)> {
    let Some(path) = path else {
        return Ok((
            ThresholdSource::Table(formats::default_threshold_table()),
            Vec::new(),
        ));
    };
    let text = read_text(path)?;
    let source = if path.extension().is_some_and(|e| e == "json") {
        ThresholdSource::Model(formats::parse_model_json(&text)?.model()?)
    } else {
        ThresholdSource::Table(
            formats::parse_threshold_table_csv(&text)
                .with_context(|| format!("loading {}", path.display()))?,
        )
    };
    Ok((source, vec![InputDigest::of(path)?]))
}

/// Re-derives plan totals independently of the planner.
fn check_plan(plan: &FleetPlan) -> Result<(), InvariantViolation> {
    let assigned = plan
        .assignments
        .values()
        .filter(|a| a.decision.is_assigned())
        .count();
    let cost: u64 = plan.assignments.values().filter_map(|a| a.cost).sum();
    let histogram: usize = plan.per_distance_histogram.values().sum();
    if assigned != plan.usable_count
        || histogram != plan.usable_count
        || cost != plan.total_physical_qubits
        || plan.assignments.len() != plan.total_count
    {
        return Err(InvariantViolation(format!(
            "plan for {} has inconsistent totals",
            plan.date
        )));
    }
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> Result<String> {
    let (series, warnings, mut inputs) =
        load_calibration(&args.input, args.date, args.device.as_deref())?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let (source, source_inputs) = load_source(args.thresholds.as_deref())?;
    inputs.extend(source_inputs);
    let policy = AssignmentPolicy::new(args.target, args.d_max, args.accounting.into())?;
    let baseline_policy = policy.with_d_max(args.baseline_d_max)?;

    let plans = series
        .snapshots()
        .iter()
        .map(|s| plan_day(s, &policy, &source))
        .collect::<Result<Vec<_>, _>>()?;
    for plan in &plans {
        check_plan(plan)?;
    }
    let baseline = baseline_distance(&series, &baseline_policy, &source)?;
    let report = compare_overhead(&plans, baseline, policy.accounting)?;

    let usability_table = match &source {
        ThresholdSource::Table(t) => t.clone(),
        ThresholdSource::Model(m) => {
            ThresholdTable::from_model(m, &planning_distances(), args.target)?
        }
    };
    let distances = usability_table.distances();
    let usability = series
        .snapshots()
        .iter()
        .map(|s| {
            let row = distances
                .iter()
                .map(|&d| usable_fraction(s, d, &usability_table))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((s.date, row))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = OutputDir::create(&args.out)?;
    for plan in &plans {
        out.write(
            &format!("plans/plan_{}.json", plan.date),
            &formats::plan_json(plan),
        )?;
        out.write(
            &format!("plans/plan_{}.csv", plan.date),
            &formats::plan_csv(plan),
        )?;
    }
    out.write(
        "usability_by_distance.csv",
        &formats::usability_csv(&distances, &usability),
    )?;
    out.write("savings.json", &formats::savings_json(&report))?;
    out.finish(Command::Plan(args), inputs)?;

    Ok(summary_text(&report))
}

fn summary_text(report: &adaptive_qec_core::SavingsReport) -> String {
    let mut text = String::new();
    let days = report.per_day_usability.len();
    let mean_usable = report.per_day_usability.iter().map(|d| d.1).sum::<f64>() / days as f64;
    writeln!(
        text,
        "baseline distance {} -> {} physical qubits per logical qubit",
        report.baseline_distance, report.baseline_cost_per_logical
    )
    .unwrap();
    writeln!(
        text,
        "adaptive mean cost {:.2} physical qubits per logical qubit ({} logical qubits over {} days)",
        report.adaptive_mean_cost_per_logical, report.adaptive_logical_qubits, days
    )
    .unwrap();
    writeln!(text, "savings {:.1}%", 100.0 * report.savings_fraction).unwrap();
    writeln!(text, "mean usable fraction {:.1}%", 100.0 * mean_usable).unwrap();
    for (date, fraction) in &report.per_day_usability {
        writeln!(text, "  {date}: {:.1}% usable", 100.0 * fraction).unwrap();
    }
    text
}

fn cmd_report(args: ReportArgs) -> Result<String> {
    let savings_path = args.input.join("savings.json");
    let usability_path = args.input.join("usability_by_distance.csv");
    let report = formats::parse_savings_json(&read_text(&savings_path)?)?;
    let usability = read_text(&usability_path)?;

    let mut text = summary_text(&report);
    writeln!(text, "usable fraction by distance:")?;
    for line in usability.lines().filter(|l| !l.starts_with('#')) {
        writeln!(text, "  {}", line.replace(',', "\t"))?;
    }

    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| args.input.join("report"));
    let mut out = OutputDir::create(&out_dir)?;
    out.write("report.txt", &text)?;
    let inputs = vec![
        InputDigest::of(&savings_path)?,
        InputDigest::of(&usability_path)?,
    ];
    out.finish(Command::Report(args), inputs)?;
    Ok(text)
}

fn cmd_rerun(args: RerunArgs) -> Result<String> {
    let manifest = RunManifest::load(&args.manifest)?;
    manifest.verify_inputs()?;
    let mut command = manifest.command;
    match &mut command {
        Command::Ingest(a) => override_out(&mut a.out, &args.out),
        Command::Sweep(a) => {
            override_out(&mut a.out, &args.out);
            a.threads = args.threads;
        }
        Command::Fit(a) => override_out(&mut a.out, &args.out),
        Command::Plan(a) => override_out(&mut a.out, &args.out),
        Command::Report(a) => {
            if args.out.is_some() {
                a.out = args.out.clone();
            }
        }
        Command::Rerun(_) => bail!("a manifest cannot record a rerun"),
    }
    run(command)
}

fn override_out(out: &mut PathBuf, new: &Option<PathBuf>) {
    if let Some(new) = new {
        *out = new.clone();
    }
}
