//! Execution of configured experiments: simulate, analyze, write artifacts,
//! run attack jobs, and drive parameter sweeps.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use masked_consensus::adversary::{
    attack_additive, attack_affine, attack_integral, AttackError, AttackReport, ObservationLog,
};
use masked_consensus::analysis::{AnalysisOptions, AnalysisReport};
use masked_consensus::dynamics::{DynamicsError, MaskedSystem, Trajectory};
use masked_consensus::graph::WeightedDigraph;
use masked_consensus::masks::{MaskFamily, MaskSpec, NodeMaskParams, ParamRanges};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    resolve, AttackConfig, AttackJobConfig, ExperimentConfig, GraphSource, MaskSource, StateSource,
};
use crate::io::{read_public_log_csv, write_string, write_trajectory_csv};
use crate::svg::{line_plot, scatter_plot, Series};
use crate::CliError;

/// Fully materialized experiment: every random choice already drawn.
pub struct PreparedExperiment {
    pub graph: WeightedDigraph,
    pub system: MaskedSystem,
    pub x0: Vec<f64>,
    pub config: ExperimentConfig,
}

pub fn prepare(config: &ExperimentConfig, base: &Path) -> Result<PreparedExperiment, CliError> {
    let graph = match &config.graph {
        GraphSource::File(p) => {
            let path = resolve(base, p);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            WeightedDigraph::from_json_str(&text)
                .map_err(|e| CliError::config(format!("bad graph {}: {e}", path.display())))?
        }
        GraphSource::Generate {
            n,
            extra_cycles,
            seed,
        } => WeightedDigraph::random_balanced(*n, *extra_cycles, *seed)
            .map_err(|e| CliError::config(format!("graph generator: {e}")))?,
    };
    let n = graph.node_count();
    let mask = match &config.mask {
        MaskSource::File(p) => {
            let path = resolve(base, p);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            MaskSpec::from_json_str(&text)
                .map_err(|e| CliError::config(format!("bad mask spec {}: {e}", path.display())))?
        }
        MaskSource::Sample {
            family,
            seed,
            ranges,
        } => MaskSpec::sample(*family, n, ranges, *seed),
    };
    if mask.len() != n {
        return Err(CliError::config(format!(
            "mask covers {} nodes, graph has {n}",
            mask.len()
        )));
    }
    let x0 = match &config.x0 {
        StateSource::File(p) => {
            let path = resolve(base, p);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            let values: Vec<f64> = serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("bad state file {}: {e}", path.display())))?;
            if values.len() != n {
                return Err(CliError::config(format!(
                    "state file has {} entries, graph has {n}",
                    values.len()
                )));
            }
            values
        }
        StateSource::Uniform { low, high, seed } => {
            if !(high > low) {
                return Err(CliError::config("x0.uniform needs high > low"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n).map(|_| rng.gen_range(*low..*high)).collect()
        }
    };
    let lap = graph
        .laplacian()
        .map_err(|e| CliError::config(format!("graph is unusable: {e}")))?;
    let system = MaskedSystem::new(lap, mask)
        .map_err(|e| CliError::config(format!("cannot build the masked system: {e}")))?;
    Ok(PreparedExperiment {
        graph,
        system,
        x0,
        config: config.clone(),
    })
}

pub fn simulate(prep: &PreparedExperiment) -> Result<Trajectory, CliError> {
    let integ = &prep.config.integrator;
    prep.system
        .integrate(
            &prep.x0,
            integ.t0,
            integ.horizon,
            integ.step,
            integ.sample_every,
        )
        .map_err(|e| match e {
            DynamicsError::NonFiniteState { t, .. } => CliError::Numerical(format!(
                "state became non-finite at t = {t}; decrease the step"
            )),
            other => CliError::config(other.to_string()),
        })
}

pub fn analysis_options(prep: &PreparedExperiment) -> AnalysisOptions {
    let a = &prep.config.analysis;
    AnalysisOptions {
        nu: a.nu,
        deviation_grid: a.deviation_grid.clone(),
        deviation_box: a.deviation_box,
        deviation_samples: a.deviation_samples,
        deviation_seed: a.deviation_seed,
    }
}

fn running_average_curve(times: &[f64], samples: &[nalgebra::DVector<f64>]) -> Vec<(f64, f64)> {
    times
        .iter()
        .zip(samples)
        .map(|(t, x)| (*t, x.iter().sum::<f64>() / x.len() as f64))
        .collect()
}

fn state_series(times: &[f64], samples: &[nalgebra::DVector<f64>], avg_label: &str) -> Vec<Series> {
    let n = samples.first().map_or(0, |x| x.len());
    let mut series: Vec<Series> = (0..n)
        .map(|i| {
            Series::line(
                times
                    .iter()
                    .zip(samples)
                    .map(|(t, x)| (*t, x[i]))
                    .collect(),
            )
        })
        .collect();
    series.push(Series::dotted(
        running_average_curve(times, samples),
        avg_label,
    ));
    series
}

/// Everything `run` leaves on disk.
pub struct RunArtifacts {
    pub analysis: AnalysisReport,
    pub files: Vec<PathBuf>,
}

/// Simulate, analyze, and write the artifact set into `out_dir`.
/// Private material (state samples, initial states, mask parameters) is
/// written only when `emit_private` is set, and the mask spec and initial
/// state go into a `private/` subdirectory, never next to the public files.
pub fn run(
    prep: &PreparedExperiment,
    out_dir: &Path,
    emit_private: bool,
) -> Result<RunArtifacts, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", out_dir.display())))?;
    let traj = simulate(prep)?;
    let report = AnalysisReport::compute(&traj, &prep.system, &analysis_options(prep));
    let mut files = Vec::new();

    let graph_path = out_dir.join("graph.json");
    write_string(&graph_path, &prep.graph.to_json_string())?;
    files.push(graph_path);

    let csv_path = out_dir.join("trajectory.csv");
    write_trajectory_csv(&csv_path, &traj, emit_private)?;
    files.push(csv_path);

    let report_path = out_dir.join("analysis.json");
    write_string(
        &report_path,
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    files.push(report_path);

    let y_plot = out_dir.join("y_trajectory.svg");
    write_string(
        &y_plot,
        &line_plot(
            "public outputs y(t)",
            "t",
            "y",
            &state_series(traj.times(), traj.y_samples(), "public average"),
        ),
    )?;
    files.push(y_plot);

    let vmm_points: Vec<(f64, f64)> = traj
        .times()
        .iter()
        .zip(traj.x_samples())
        .map(|(t, x)| (*t, masked_consensus::analysis::vmm(x.as_slice())))
        .collect();
    let vmm_plot = out_dir.join("vmm.svg");
    write_string(
        &vmm_plot,
        &line_plot(
            "state spread max - min",
            "t",
            "spread",
            &[Series::line(vmm_points)],
        ),
    )?;
    files.push(vmm_plot);

    if emit_private {
        let x_plot = out_dir.join("x_trajectory.svg");
        write_string(
            &x_plot,
            &line_plot(
                "private states x(t)",
                "t",
                "x",
                &state_series(traj.times(), traj.x_samples(), "private average"),
            ),
        )?;
        files.push(x_plot);

        let scatter: Vec<(f64, f64)> = prep
            .x0
            .iter()
            .zip(traj.y_samples()[0].iter())
            .map(|(x, y)| (*x, *y))
            .collect();
        let scatter_path = out_dir.join("x0_vs_y0.svg");
        write_string(
            &scatter_path,
            &scatter_plot("initial state vs initial output", "x(0)", "y(0)", &scatter, true),
        )?;
        files.push(scatter_path);

        let x0_path = out_dir.join("private").join("x0.json");
        write_string(
            &x0_path,
            &serde_json::to_string_pretty(&prep.x0).expect("vector serializes"),
        )?;
        files.push(x0_path);

        let mask_path = out_dir.join("private").join("mask_spec.json");
        write_string(&mask_path, &prep.system.mask().to_json_string())?;
        files.push(mask_path);
    }

    if !prep.config.attacks.is_empty() {
        let mut reports = Vec::new();
        for attack in &prep.config.attacks {
            reports.extend(execute_attacks(attack, &traj, prep, None)?);
        }
        for report in &mut reports {
            report.grade(&prep.x0);
        }
        let attacks_path = out_dir.join("attacks.json");
        write_string(
            &attacks_path,
            &serde_json::to_string_pretty(&reports).expect("reports serialize"),
        )?;
        files.push(attacks_path);
    }

    Ok(RunArtifacts {
        analysis: report,
        files,
    })
}

fn map_attack_error(e: AttackError) -> CliError {
    CliError::config(e.to_string())
}

/// Run one configured attack against a trajectory's public view.
fn execute_attacks(
    attack: &AttackConfig,
    traj: &Trajectory,
    prep: &PreparedExperiment,
    targets: Option<Vec<usize>>,
) -> Result<Vec<AttackReport>, CliError> {
    let lap = prep.system.laplacian().clone();
    let mut out = Vec::new();
    match attack {
        AttackConfig::Additive => {
            let log = ObservationLog::from_trajectory(
                traj,
                lap,
                Some(MaskFamily::Additive),
                targets,
            )
            .map_err(map_attack_error)?;
            out.push(attack_additive(&log).map_err(map_attack_error)?);
        }
        AttackConfig::Affine { c_grid } => {
            let log =
                ObservationLog::from_trajectory(traj, lap, Some(MaskFamily::Affine), targets)
                    .map_err(map_attack_error)?;
            out.push(attack_affine(&log, c_grid).map_err(map_attack_error)?);
        }
        AttackConfig::Integral { victim, attacker } => {
            let log = ObservationLog::from_trajectory(traj, lap, None, targets)
                .map_err(map_attack_error)?;
            let mut report = attack_integral(&log, *victim, *attacker, &prep.graph)
                .map_err(map_attack_error)?;
            report.attack = format!("integral[{victim}<-{attacker}]");
            out.push(report);
        }
        AttackConfig::Suite { c_grid } => {
            out.extend(execute_attacks(&AttackConfig::Additive, traj, prep, targets.clone())?);
            out.extend(execute_attacks(
                &AttackConfig::Affine {
                    c_grid: c_grid.clone(),
                },
                traj,
                prep,
                targets.clone(),
            )?);
            for (victim, attacker) in prep.graph.assumption1_violations() {
                out.extend(execute_attacks(
                    &AttackConfig::Integral { victim, attacker },
                    traj,
                    prep,
                    targets.clone(),
                )?);
            }
        }
    }
    Ok(out)
}

/// Run an attack job against an on-disk log. Failure of the attack itself is
/// a finding, not an error; only unusable inputs fail the job.
pub fn run_attack_job(
    job: &AttackJobConfig,
    base: &Path,
    truth: Option<&[f64]>,
) -> Result<Vec<AttackReport>, CliError> {
    let graph_path = resolve(base, &job.graph);
    let text = std::fs::read_to_string(&graph_path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", graph_path.display())))?;
    let graph = WeightedDigraph::from_json_str(&text)
        .map_err(|e| CliError::config(format!("bad graph {}: {e}", graph_path.display())))?;
    let lap = graph
        .laplacian()
        .map_err(|e| CliError::config(format!("graph is unusable: {e}")))?;
    let (times, y_samples) = read_public_log_csv(&resolve(base, &job.log_csv))?;

    let build_log = |family: Option<MaskFamily>| {
        ObservationLog::new(
            times.clone(),
            y_samples.clone(),
            lap.clone(),
            family,
            job.targets.clone(),
        )
        .map_err(map_attack_error)
    };

    let mut reports = Vec::new();
    let mut jobs: Vec<AttackConfig> = Vec::new();
    match &job.attack {
        AttackConfig::Suite { c_grid } => {
            jobs.push(AttackConfig::Additive);
            jobs.push(AttackConfig::Affine {
                c_grid: c_grid.clone(),
            });
            for (victim, attacker) in graph.assumption1_violations() {
                jobs.push(AttackConfig::Integral { victim, attacker });
            }
        }
        other => jobs.push(other.clone()),
    }
    for attack in jobs {
        match attack {
            AttackConfig::Additive => {
                let log = build_log(Some(MaskFamily::Additive))?;
                reports.push(attack_additive(&log).map_err(map_attack_error)?);
            }
            AttackConfig::Affine { c_grid } => {
                let log = build_log(Some(MaskFamily::Affine))?;
                reports.push(attack_affine(&log, &c_grid).map_err(map_attack_error)?);
            }
            AttackConfig::Integral { victim, attacker } => {
                let log = build_log(None)?;
                let mut report = attack_integral(&log, victim, attacker, &graph)
                    .map_err(map_attack_error)?;
                report.attack = format!("integral[{victim}<-{attacker}]");
                reports.push(report);
            }
            AttackConfig::Suite { .. } => unreachable!("suite expanded above"),
        }
    }
    if let Some(truth) = truth {
        for report in &mut reports {
            report.grade(truth);
        }
    }
    Ok(reports)
}

/// One sweep grid point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub seed: u64,
    pub sigma: f64,
    pub delta: f64,
    pub convergence_time: Option<f64>,
    pub conservation_residual: f64,
    pub vmm_monotone: bool,
    pub attacks: String,
}

impl SweepRow {
    pub fn key(seed: u64, sigma: f64, delta: f64) -> String {
        format!("{seed},{sigma},{delta}")
    }

    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.seed,
            self.sigma,
            self.delta,
            self.convergence_time
                .map(|t| crate::io::fmt_f64(t))
                .unwrap_or_else(|| "unreached".into()),
            crate::io::fmt_f64(self.conservation_residual),
            self.vmm_monotone,
            self.attacks
        )
    }
}

pub const SWEEP_HEADER: &str =
    "seed,sigma,delta,convergence_time,conservation_residual,vmm_monotone,attacks";

/// Run (or resume) a sweep: one row per `(seed, sigma, delta)` grid point in
/// lexicographic order. Rows already present in the output file are kept as
/// they are, so a rerun is a no-op and an interrupted sweep picks up where
/// it stopped.
pub fn run_sweep(
    config: &ExperimentConfig,
    base: &Path,
    out_path: &Path,
    jobs: Option<usize>,
) -> Result<usize, CliError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("config has no sweep section"))?;

    let mut existing_rows: Vec<String> = Vec::new();
    let mut existing_keys: BTreeSet<String> = BTreeSet::new();
    if out_path.is_file() {
        let text = std::fs::read_to_string(out_path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", out_path.display())))?;
        for line in text.lines().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.splitn(4, ',').collect();
            if fields.len() < 4 {
                return Err(CliError::config(format!(
                    "unexpected row in existing sweep output: {line:?}"
                )));
            }
            existing_keys.insert(format!("{},{},{}", fields[0], fields[1], fields[2]));
            existing_rows.push(line.to_string());
        }
    }

    let mut grid = Vec::new();
    for &seed in &sweep.seeds {
        for &sigma in &sweep.sigma {
            for &delta in &sweep.delta {
                if !existing_keys.contains(&SweepRow::key(seed, sigma, delta)) {
                    grid.push((seed, sigma, delta));
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config(format!("cannot build worker pool: {e}")))?;
    let computed: Result<Vec<SweepRow>, CliError> = pool.install(|| {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|&(seed, sigma, delta)| sweep_point(config, base, seed, sigma, delta))
            .collect()
    });
    let computed = computed?;
    let fresh = computed.len();

    let mut all_rows: Vec<(String, String)> = existing_rows
        .into_iter()
        .map(|line| {
            let fields: Vec<&str> = line.splitn(4, ',').collect();
            (format!("{},{},{}", fields[0], fields[1], fields[2]), line)
        })
        .collect();
    for row in computed {
        all_rows.push((SweepRow::key(row.seed, row.sigma, row.delta), row.to_csv()));
    }
    // Deterministic order: grid order over the configured lists.
    let order: Vec<String> = sweep
        .seeds
        .iter()
        .flat_map(|&s| {
            sweep.sigma.iter().flat_map(move |&sg| {
                sweep
                    .delta
                    .iter()
                    .map(move |&d| SweepRow::key(s, sg, d))
            })
        })
        .collect();
    all_rows.sort_by_key(|(key, _)| {
        order
            .iter()
            .position(|k| k == key)
            .unwrap_or(usize::MAX)
    });

    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for (_, line) in &all_rows {
        text.push_str(line);
        text.push('\n');
    }
    write_string(out_path, &text)?;
    Ok(fresh)
}

fn sweep_point(
    config: &ExperimentConfig,
    base: &Path,
    seed: u64,
    sigma: f64,
    delta: f64,
) -> Result<SweepRow, CliError> {
    let mut point_config = config.clone();
    point_config.sweep = None;
    point_config.override_seed(seed);
    let prep = prepare(&point_config, base)?;

    // Pin both decay rates across the network to the grid point.
    let forced: Vec<NodeMaskParams> = prep
        .system
        .mask()
        .params()
        .iter()
        .map(|p| NodeMaskParams {
            sigma,
            delta,
            ..*p
        })
        .collect();
    let mask = MaskSpec::new(prep.system.mask().family(), forced)
        .map_err(|e| CliError::config(format!("sweep mask rebuild: {e}")))?;
    let system = MaskedSystem::new(prep.system.laplacian().clone(), mask)
        .map_err(|e| CliError::config(format!("sweep system rebuild: {e}")))?;
    let prep = PreparedExperiment {
        graph: prep.graph,
        system,
        x0: prep.x0,
        config: point_config,
    };

    let traj = simulate(&prep)?;
    let conservation = traj.conservation();
    let report = AnalysisReport::compute(
        &traj,
        &prep.system,
        &AnalysisOptions {
            deviation_grid: vec![],
            ..analysis_options(&prep)
        },
    );
    let attacks = if prep.config.attacks.is_empty() {
        "-".to_string()
    } else {
        let mut parts = Vec::new();
        for attack in &prep.config.attacks {
            for mut rep in execute_attacks(attack, &traj, &prep, None)? {
                rep.grade(&prep.x0);
                let hits = rep.recovered_within(0.01).len();
                parts.push(format!("{}:{}/{}", rep.attack, hits, rep.nodes.len()));
            }
        }
        parts.join(";")
    };
    Ok(SweepRow {
        seed,
        sigma,
        delta,
        convergence_time: report.convergence_time,
        conservation_residual: conservation.state_sum_drift,
        vmm_monotone: report.vmm_monotone,
        attacks,
    })
}

/// Parse whatever `check` receives: a graph file or a mask spec file,
/// distinguished by their top-level keys.
pub enum CheckSubject {
    Graph(WeightedDigraph),
    Mask(MaskSpec),
}

pub fn load_check_subject(path: &Path) -> Result<CheckSubject, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{} is not JSON: {e}", path.display())))?;
    let object = value
        .as_object()
        .ok_or_else(|| CliError::config(format!("{} is not a JSON object", path.display())))?;
    if object.contains_key("n") && object.contains_key("edges") {
        let graph = WeightedDigraph::from_json_str(&text)
            .map_err(|e| CliError::config(format!("bad graph {}: {e}", path.display())))?;
        Ok(CheckSubject::Graph(graph))
    } else if object.contains_key("family") && object.contains_key("params") {
        let mask = MaskSpec::from_json_str(&text)
            .map_err(|e| CliError::config(format!("bad mask spec {}: {e}", path.display())))?;
        Ok(CheckSubject::Mask(mask))
    } else {
        Err(CliError::config(format!(
            "{}: expected a graph ({{n, edges}}) or a mask spec ({{family, params}})",
            path.display()
        )))
    }
}

/// Default ranges used when sampling a spec for audits from the CLI.
pub fn audit_ranges() -> ParamRanges {
    ParamRanges::default()
}
