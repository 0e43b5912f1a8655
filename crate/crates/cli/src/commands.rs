//! Subcommand implementations. Each command has a pure computation function
//! (used directly by the test suites) and a thin `cmd_*` wrapper that prints
//! a summary and writes the output files.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use bellsim_core::{
    bentkus_pvalue, build_bell_circuit, build_confusion, chsh_max, count_resources,
    exact_distribution, sample_counts, simplex_project, zg_score_rule, BellResult, Circuit,
    DurationTable, ExperimentSpec, Implementation, JointDistribution, NoisySampler,
    OutcomeCounts, Party, ResourceReport, ScoreRule, Tilt,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, MitigationMode, NoiseConfig};
use crate::report::{
    ensure_dir, write_csv_file, write_json_file, CombinationReport, PvalueReport, RunReport,
    RunStatus, REPORT_SCHEMA_VERSION,
};
use crate::CliError;

/// The four setting pairs, in report order.
pub const SETTINGS: [(u8, u8); 4] = [(1, 1), (1, 2), (2, 1), (2, 2)];

/// CHSH values this far above 2 count as violations (absorbs float dust in
/// exact evaluations).
pub const CHSH_VIOLATION_MARGIN: f64 = 1e-9;

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the shot stream for one (n, implementation, setting) cell.
///
/// Deliberately independent of the mitigation mode: modes that share a cell
/// replay the same shots, so mode comparisons are paired rather than
/// independently noisy.
pub fn stream_seed(base: u64, n: usize, implementation: Implementation, x: u8, y: u8) -> u64 {
    let imp = match implementation {
        Implementation::Unitary => 1u64,
        Implementation::Dynamic => 2u64,
    };
    mix64(base ^ mix64(((n as u64) << 24) | (imp << 16) | ((x as u64) << 8) | y as u64))
}

fn tilt_stream_seed(
    base: u64,
    n: usize,
    implementation: Implementation,
    qubit: usize,
    angle_index: usize,
    x: u8,
    y: u8,
) -> u64 {
    let scan_base = mix64(base ^ mix64((1 << 63) | ((qubit as u64) << 32) | angle_index as u64));
    stream_seed(scan_base, n, implementation, x, y)
}

pub fn implementation_label(implementation: Implementation) -> &'static str {
    match implementation {
        Implementation::Unitary => "unitary",
        Implementation::Dynamic => "dynamic",
    }
}

pub fn party_label(party: Party) -> &'static str {
    match party {
        Party::Alice => "alice",
        Party::Bob => "bob",
    }
}

fn durations_for(config: &ExperimentConfig) -> DurationTable {
    match &config.noise {
        NoiseConfig::Model(m) => m.durations,
        NoiseConfig::Ideal => DurationTable::default(),
    }
}

/// Dynamic circuits need a second qubit for the measure-as-you-go stage.
fn combination_supported(n: usize, implementation: Implementation) -> bool {
    implementation == Implementation::Unitary || n >= 2
}

fn setting_circuits(
    n: usize,
    implementation: Implementation,
    tilt: Option<Tilt>,
) -> Result<BTreeMap<(u8, u8), Circuit>, CliError> {
    let mut circuits = BTreeMap::new();
    for (x, y) in SETTINGS {
        let mut spec = ExperimentSpec::new(n, implementation, x, y)?;
        if let Some(t) = tilt {
            spec = spec.with_tilt(t)?;
        }
        circuits.insert((x, y), build_bell_circuit(&spec)?);
    }
    Ok(circuits)
}

fn exact_joint(circuits: &BTreeMap<(u8, u8), Circuit>) -> Result<JointDistribution, CliError> {
    let n = circuits[&(1, 1)].num_qubits / 2;
    let mut dists = BTreeMap::new();
    for (&xy, circuit) in circuits {
        dists.insert(xy, exact_distribution(circuit)?);
    }
    Ok(JointDistribution::from_outcome_probabilities(n, &dists)?)
}

/// Expected per-trial score of `rule` when settings are uniform and outcomes
/// follow `jd`.
fn mean_rule_score(rule: &ScoreRule, jd: &JointDistribution) -> Result<f64, CliError> {
    let d = jd.d();
    let mut total = 0.0;
    for (x, y) in SETTINGS {
        for a in 0..d {
            for b in 0..d {
                let p = jd.probability(x, y, a, b);
                if p != 0.0 {
                    total += 0.25 * p * rule.score(x, y, a, b)?;
                }
            }
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// ideal
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct IdealRow {
    pub n: usize,
    pub d: usize,
    pub result: BellResult,
}

/// Exact noiseless functional per register size, from the coherent-transform
/// circuit's output distribution.
pub fn ideal_table(n_list: &[usize]) -> Result<Vec<IdealRow>, CliError> {
    n_list
        .par_iter()
        .map(|&n| {
            let circuits = setting_circuits(n, Implementation::Unitary, None)?;
            let jd = exact_joint(&circuits)?;
            Ok(IdealRow {
                n,
                d: 1 << n,
                result: jd.izg(),
            })
        })
        .collect()
}

pub fn cmd_ideal(config: &ExperimentConfig) -> Result<(), CliError> {
    let rows = ideal_table(&config.n_list)?;
    println!("{:>3} {:>5} {:>10} {:>10}", "n", "d", "izg", "i_d");
    for row in &rows {
        println!(
            "{:>3} {:>5} {:>10.6} {:>10.6}",
            row.n, row.d, row.result.izg, row.result.i_d
        );
    }
    ensure_dir(&config.output_dir)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.n.to_string(),
                row.d.to_string(),
                format!("{:.12}", row.result.izg),
                format!("{:.12}", row.result.i_d),
                format!("{:.12}", row.result.p_a1_lt_b1),
                format!("{:.12}", row.result.p_a2_lt_b2),
                format!("{:.12}", row.result.p_a2_lt_b1),
                format!("{:.12}", row.result.p_a1_le_b2),
            ]
        })
        .collect();
    let path = config.output_dir.join("ideal.csv");
    write_csv_file(
        &path,
        &[
            "n",
            "d",
            "izg",
            "i_d",
            "p_a1_lt_b1",
            "p_a2_lt_b2",
            "p_a2_lt_b1",
            "p_a1_le_b2",
        ],
        &csv_rows,
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

pub type CountsBySetting = BTreeMap<(u8, u8), OutcomeCounts>;

/// Runs one (n, implementation, mitigation) combination. Failures land in
/// the report row instead of aborting the whole run.
pub fn run_combination(
    config: &ExperimentConfig,
    n: usize,
    implementation: Implementation,
    mitigation: MitigationMode,
    exact: bool,
) -> (CombinationReport, CountsBySetting) {
    let mut rep = CombinationReport {
        n,
        d: 1 << n,
        implementation,
        mitigation,
        status: RunStatus::Ok,
        detail: None,
        shots_per_setting: None,
        raw_izg: None,
        result: None,
        p_value: None,
        resources: None,
        counts_files: BTreeMap::new(),
    };
    if !combination_supported(n, implementation) {
        rep.status = RunStatus::Skipped;
        rep.detail =
            Some("measurement-based transform needs at least two qubits per party".into());
        return (rep, BTreeMap::new());
    }
    match compute_combination(config, n, implementation, mitigation, exact, &mut rep) {
        Ok(counts) => (rep, counts),
        Err(e) => {
            rep.status = RunStatus::Error;
            rep.detail = Some(e.to_string());
            (rep, BTreeMap::new())
        }
    }
}

fn compute_combination(
    config: &ExperimentConfig,
    n: usize,
    implementation: Implementation,
    mitigation: MitigationMode,
    exact: bool,
    rep: &mut CombinationReport,
) -> Result<CountsBySetting, CliError> {
    let circuits = setting_circuits(n, implementation, None)?;
    rep.resources = Some(count_resources(&circuits[&(1, 1)], &durations_for(config)));

    if exact {
        // Only reachable with ideal noise (checked in cmd_run); mitigation
        // modes are inert on exact distributions.
        let jd = exact_joint(&circuits)?;
        let result = jd.izg();
        rep.raw_izg = Some(result.izg);
        rep.result = Some(result);
        return Ok(BTreeMap::new());
    }

    let shots = config.shots_for(n);
    rep.shots_per_setting = Some(shots);
    let mut raw_counts: CountsBySetting = BTreeMap::new();
    for (x, y) in SETTINGS {
        let seed = stream_seed(config.seed, n, implementation, x, y);
        let circuit = &circuits[&(x, y)];
        let counts = match &config.noise {
            NoiseConfig::Ideal => sample_counts(circuit, shots, seed)?,
            NoiseConfig::Model(model) => {
                NoisySampler::new(circuit, model, mitigation.uses_dd())?
                    .sample_counts(shots, seed)?
            }
        };
        raw_counts.insert((x, y), counts);
    }

    let raw_jd = JointDistribution::from_counts(n, &raw_counts)?;
    rep.raw_izg = Some(raw_jd.izg().izg);
    let final_jd = match (&config.noise, mitigation.uses_em()) {
        (NoiseConfig::Model(model), true) => {
            let mut dists = BTreeMap::new();
            for (xy, counts) in &raw_counts {
                let confusion = build_confusion(&circuits[xy], model)?;
                let unfolded = confusion.mitigate(counts)?;
                dists.insert(*xy, simplex_project(&unfolded));
            }
            JointDistribution::from_outcome_probabilities(n, &dists)?
        }
        // Nothing to unfold without a readout model.
        _ => raw_jd,
    };
    let result = final_jd.izg();
    rep.result = Some(result);

    let rule = zg_score_rule(1 << n)?;
    let mean_score = mean_rule_score(&rule, &final_jd)?;
    let trials = 4 * shots;
    let p_value = bentkus_pvalue(mean_score * trials as f64, trials, &rule)?;
    rep.p_value = Some(PvalueReport {
        rule: rule.name.clone(),
        trials,
        mean_score,
        p_value,
    });
    Ok(raw_counts)
}

/// Runs every configured combination on the worker pool; report rows keep
/// configuration order regardless of completion order.
pub fn run_experiment(
    config: &ExperimentConfig,
    exact: bool,
) -> (RunReport, Vec<CountsBySetting>) {
    let mut combos = Vec::new();
    for &n in &config.n_list {
        for &implementation in &config.implementations {
            for &mitigation in &config.mitigation {
                combos.push((n, implementation, mitigation));
            }
        }
    }
    let results: Vec<(CombinationReport, CountsBySetting)> = combos
        .par_iter()
        .map(|&(n, implementation, mitigation)| {
            run_combination(config, n, implementation, mitigation, exact)
        })
        .collect();
    let (combinations, counts): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: config.seed,
        exact,
        config: config.clone(),
        combinations,
    };
    (report, counts)
}

fn combination_line(rep: &CombinationReport) -> String {
    let head = format!(
        "n={} d={} {} {}",
        rep.n,
        rep.d,
        implementation_label(rep.implementation),
        rep.mitigation.label()
    );
    match rep.status {
        RunStatus::Skipped => format!("{head} skipped: {}", rep.detail.as_deref().unwrap_or("")),
        RunStatus::Error => format!("{head} error: {}", rep.detail.as_deref().unwrap_or("")),
        RunStatus::Ok => {
            let result = rep.result.as_ref().expect("ok row has a result");
            let mut line = format!("{head} izg={:.6} i_d={:.6}", result.izg, result.i_d);
            if rep.mitigation.uses_em() {
                if let Some(raw) = rep.raw_izg {
                    if raw != result.izg {
                        line.push_str(&format!(" raw={raw:.6}"));
                    }
                }
            }
            if let Some(p) = &rep.p_value {
                line.push_str(&format!(" p={:.3e}", p.p_value));
            }
            line
        }
    }
}

pub fn cmd_run(config: &ExperimentConfig, exact: bool) -> Result<(), CliError> {
    if exact && !config.noise.is_ideal() {
        return Err(CliError::Config(
            "--exact evaluates exact distributions and needs noise = \"ideal\"".into(),
        ));
    }
    ensure_dir(&config.output_dir)?;
    let (mut report, all_counts) = run_experiment(config, exact);

    let counts_dir = config.output_dir.join("counts");
    for (rep, counts) in report.combinations.iter_mut().zip(&all_counts) {
        if counts.is_empty() {
            continue;
        }
        ensure_dir(&counts_dir)?;
        for ((x, y), tally) in counts {
            let name = format!(
                "counts_n{}_{}_{}_x{x}y{y}.json",
                rep.n,
                implementation_label(rep.implementation),
                rep.mitigation.label()
            );
            write_json_file(&counts_dir.join(&name), tally)?;
            rep.counts_files
                .insert(format!("x{x}y{y}"), format!("counts/{name}"));
        }
    }

    write_json_file(&config.output_dir.join("report.json"), &report)?;

    let csv_rows: Vec<Vec<String>> = report
        .combinations
        .iter()
        .map(|rep| {
            let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.12}")).unwrap_or_default();
            vec![
                rep.n.to_string(),
                rep.d.to_string(),
                implementation_label(rep.implementation).to_string(),
                rep.mitigation.label().to_string(),
                format!("{:?}", rep.status).to_lowercase(),
                rep.shots_per_setting
                    .map(|s| s.to_string())
                    .unwrap_or_default(),
                fmt_opt(rep.raw_izg),
                fmt_opt(rep.result.as_ref().map(|r| r.izg)),
                fmt_opt(rep.result.as_ref().map(|r| r.i_d)),
                rep.p_value
                    .as_ref()
                    .map(|p| format!("{:.6e}", p.p_value))
                    .unwrap_or_default(),
            ]
        })
        .collect();
    write_csv_file(
        &config.output_dir.join("summary.csv"),
        &[
            "n",
            "d",
            "implementation",
            "mitigation",
            "status",
            "shots_per_setting",
            "raw_izg",
            "izg",
            "i_d",
            "p_value",
        ],
        &csv_rows,
    )?;

    for rep in &report.combinations {
        println!("{}", combination_line(rep));
    }
    println!("wrote {}", config.output_dir.join("report.json").display());

    let failures = report
        .combinations
        .iter()
        .filter(|c| c.status == RunStatus::Error)
        .count();
    if failures > 0 {
        return Err(CliError::Runtime(format!(
            "{failures} combination(s) failed; details in report.json"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// tilt-scan
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct TiltRow {
    pub n: usize,
    pub implementation: Implementation,
    pub party: Party,
    pub qubit: usize,
    pub theta: f64,
    pub izg: f64,
}

/// Nine evenly spaced angles spanning [0, pi]; the zero entry doubles as the
/// untilted baseline.
pub fn default_tilt_grid() -> Vec<f64> {
    (0..9).map(|k| k as f64 * PI / 8.0).collect()
}

pub fn tilt_scan_rows(config: &ExperimentConfig) -> Result<Vec<TiltRow>, CliError> {
    let scan = config.tilt_scan.as_ref().ok_or_else(|| {
        CliError::Config("tilt-scan needs a tilt_scan section in the config".into())
    })?;
    let angles = scan.angles.clone().unwrap_or_else(default_tilt_grid);

    let mut points = Vec::new();
    for &n in &config.n_list {
        let qubits: Vec<usize> = if scan.qubits.is_empty() {
            (1..=n).collect()
        } else {
            scan.qubits.clone()
        };
        for &implementation in &config.implementations {
            if !combination_supported(n, implementation) {
                continue;
            }
            for &qubit in &qubits {
                for (angle_index, &theta) in angles.iter().enumerate() {
                    points.push((n, implementation, qubit, angle_index, theta));
                }
            }
        }
    }

    points
        .par_iter()
        .map(|&(n, implementation, qubit, angle_index, theta)| {
            let tilt = Tilt {
                party: scan.party,
                qubit,
                theta,
            };
            let circuits = setting_circuits(n, implementation, Some(tilt))?;
            let izg = match &config.noise {
                NoiseConfig::Ideal => exact_joint(&circuits)?.izg().izg,
                NoiseConfig::Model(model) => {
                    let shots = config.shots_for(n);
                    let mut counts = BTreeMap::new();
                    for (&(x, y), circuit) in &circuits {
                        let seed = tilt_stream_seed(
                            config.seed,
                            n,
                            implementation,
                            qubit,
                            angle_index,
                            x,
                            y,
                        );
                        counts.insert(
                            (x, y),
                            NoisySampler::new(circuit, model, false)?.sample_counts(shots, seed)?,
                        );
                    }
                    JointDistribution::from_counts(n, &counts)?.izg().izg
                }
            };
            Ok(TiltRow {
                n,
                implementation,
                party: scan.party,
                qubit,
                theta,
                izg,
            })
        })
        .collect()
}

pub fn cmd_tilt_scan(config: &ExperimentConfig) -> Result<(), CliError> {
    let rows = tilt_scan_rows(config)?;
    ensure_dir(&config.output_dir)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.n.to_string(),
                (1usize << row.n).to_string(),
                implementation_label(row.implementation).to_string(),
                party_label(row.party).to_string(),
                row.qubit.to_string(),
                format!("{:.10}", row.theta),
                format!("{:.12}", row.izg),
            ]
        })
        .collect();
    let path = config.output_dir.join("tilt_scan.csv");
    write_csv_file(
        &path,
        &["n", "d", "implementation", "party", "qubit", "theta", "izg"],
        &csv_rows,
    )?;
    println!("{} tilt points", rows.len());
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// pairwise
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct PairwiseTable {
    pub n: usize,
    /// `values[i-1][j-1]` is the best CHSH value of Alice qubit i with Bob
    /// qubit j.
    pub values: Vec<Vec<f64>>,
    pub violating: usize,
}

/// Exact noiseless CHSH table of every qubit pair, from the
/// coherent-transform circuit (the measurement implementations agree
/// exactly, so one suffices).
pub fn pairwise_tables(config: &ExperimentConfig) -> Result<Vec<PairwiseTable>, CliError> {
    if !config.pairwise {
        return Err(CliError::Config(
            "pairwise needs \"pairwise\": true in the config".into(),
        ));
    }
    config
        .n_list
        .par_iter()
        .map(|&n| {
            let circuits = setting_circuits(n, Implementation::Unitary, None)?;
            let jd = exact_joint(&circuits)?;
            let mut values = vec![vec![0.0; n]; n];
            let mut violating = 0;
            for i in 1..=n {
                for j in 1..=n {
                    let value = chsh_max(&jd.pairwise_marginal(i, j)?);
                    if value > 2.0 + CHSH_VIOLATION_MARGIN {
                        violating += 1;
                    }
                    values[i - 1][j - 1] = value;
                }
            }
            Ok(PairwiseTable { n, values, violating })
        })
        .collect()
}

pub fn cmd_pairwise(config: &ExperimentConfig) -> Result<(), CliError> {
    let tables = pairwise_tables(config)?;
    ensure_dir(&config.output_dir)?;
    let mut csv_rows = Vec::new();
    for table in &tables {
        println!("n={} qubit-pair CHSH values (rows: Alice, cols: Bob)", table.n);
        for (i, row) in table.values.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            println!("  qubit {:>2}: {}", i + 1, cells.join(" "));
            for (j, &value) in row.iter().enumerate() {
                csv_rows.push(vec![
                    table.n.to_string(),
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    format!("{value:.12}"),
                    (value > 2.0 + CHSH_VIOLATION_MARGIN).to_string(),
                ]);
            }
        }
        println!(
            "  violating pairs: {} of {}",
            table.violating,
            table.n * table.n
        );
    }
    let path = config.output_dir.join("pairwise.csv");
    write_csv_file(
        &path,
        &["n", "alice_qubit", "bob_qubit", "chsh_max", "violating"],
        &csv_rows,
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// pvalue
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct PvalueCurveRow {
    pub n: usize,
    pub d: usize,
    pub rule: String,
    pub mean_score: f64,
    pub trials: u64,
    pub p_value: f64,
}

/// Trial budgets for significance projections: powers of two from 16 to
/// 262144.
pub fn default_trial_budgets() -> Vec<u64> {
    (4..=18).map(|k| 1u64 << k).collect()
}

/// Projects the tail bound over trial budgets, assuming trials score at the
/// exact noiseless mean.
pub fn pvalue_rows(config: &ExperimentConfig) -> Result<Vec<PvalueCurveRow>, CliError> {
    if !config.pvalues {
        return Err(CliError::Config(
            "pvalue needs \"pvalues\": true in the config".into(),
        ));
    }
    let budgets = default_trial_budgets();
    let per_n: Vec<Vec<PvalueCurveRow>> = config
        .n_list
        .par_iter()
        .map(|&n| {
            let circuits = setting_circuits(n, Implementation::Unitary, None)?;
            let jd = exact_joint(&circuits)?;
            let rule = zg_score_rule(1 << n)?;
            let mean_score = mean_rule_score(&rule, &jd)?;
            let curve = bellsim_core::pvalue_curve(&rule, mean_score, &budgets)?;
            Ok(curve
                .into_iter()
                .map(|(trials, p_value)| PvalueCurveRow {
                    n,
                    d: 1 << n,
                    rule: rule.name.clone(),
                    mean_score,
                    trials,
                    p_value,
                })
                .collect())
        })
        .collect::<Result<_, CliError>>()?;
    Ok(per_n.into_iter().flatten().collect())
}

pub fn cmd_pvalue(config: &ExperimentConfig) -> Result<(), CliError> {
    let rows = pvalue_rows(config)?;
    ensure_dir(&config.output_dir)?;
    for &n in &config.n_list {
        let curve: Vec<&PvalueCurveRow> = rows.iter().filter(|r| r.n == n).collect();
        let first = curve.first().expect("every n produces rows");
        let threshold = curve.iter().find(|r| r.p_value < 1e-3);
        match threshold {
            Some(row) => println!(
                "n={n} d={} mean={:.6}: p<1e-3 from {} trials (p={:.3e})",
                first.d, first.mean_score, row.trials, row.p_value
            ),
            None => println!(
                "n={n} d={} mean={:.6}: p>=1e-3 at every budget up to {}",
                first.d,
                first.mean_score,
                curve.last().expect("curve nonempty").trials
            ),
        }
    }
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.n.to_string(),
                row.d.to_string(),
                row.rule.clone(),
                format!("{:.12}", row.mean_score),
                row.trials.to_string(),
                format!("{:.6e}", row.p_value),
            ]
        })
        .collect();
    let path = config.output_dir.join("pvalues.csv");
    write_csv_file(
        &path,
        &["n", "d", "rule", "mean_score", "trials", "p_value"],
        &csv_rows,
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// resources
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ResourceRow {
    pub n: usize,
    pub implementation: Implementation,
    pub report: ResourceReport,
}

/// Static circuit costs per configured combination (settings share the same
/// shape, so one circuit per combination suffices).
pub fn resource_rows(config: &ExperimentConfig) -> Result<Vec<ResourceRow>, CliError> {
    let durations = durations_for(config);
    let mut rows = Vec::new();
    for &n in &config.n_list {
        for &implementation in &config.implementations {
            if !combination_supported(n, implementation) {
                continue;
            }
            let circuit = build_bell_circuit(&ExperimentSpec::new(n, implementation, 1, 1)?)?;
            rows.push(ResourceRow {
                n,
                implementation,
                report: count_resources(&circuit, &durations),
            });
        }
    }
    Ok(rows)
}

pub fn cmd_resources(config: &ExperimentConfig) -> Result<(), CliError> {
    let rows = resource_rows(config)?;
    println!(
        "{:>3} {:>5} {:>8} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>9}",
        "n", "d", "impl", "instr", "1q", "2q", "meas", "ff", "depth", "runtime"
    );
    for row in &rows {
        let r = &row.report;
        println!(
            "{:>3} {:>5} {:>8} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>9.1}",
            row.n,
            1usize << row.n,
            implementation_label(row.implementation),
            r.num_instructions,
            r.one_qubit_gates,
            r.two_qubit_gates,
            r.mid_circuit_measurements,
            r.feed_forward_operations,
            r.depth,
            r.estimated_runtime
        );
    }
    ensure_dir(&config.output_dir)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let r = &row.report;
            vec![
                row.n.to_string(),
                (1usize << row.n).to_string(),
                implementation_label(row.implementation).to_string(),
                r.num_qubits.to_string(),
                r.num_instructions.to_string(),
                r.one_qubit_gates.to_string(),
                r.two_qubit_gates.to_string(),
                r.mid_circuit_measurements.to_string(),
                r.feed_forward_operations.to_string(),
                r.depth.to_string(),
                format!("{:.3}", r.estimated_runtime),
            ]
        })
        .collect();
    let path = config.output_dir.join("resources.csv");
    write_csv_file(
        &path,
        &[
            "n",
            "d",
            "implementation",
            "qubits",
            "instructions",
            "one_qubit_gates",
            "two_qubit_gates",
            "mid_circuit_measurements",
            "feed_forward_operations",
            "depth",
            "estimated_runtime",
        ],
        &csv_rows,
    )?;
    println!("wrote {}", path.display());
    Ok(())
}
