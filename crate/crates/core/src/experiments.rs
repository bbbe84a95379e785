//! Scenario sweeps over the standard result set, with CSV emission and
//! analytic-versus-measured comparison.
//!
//! Four scenarios are built in:
//!
//! * `per_subcarrier_ini` — interference per victim subcarrier, both
//!   numerologies, both CP modes, at one spacing ratio;
//! * `q_sweep` — the same profiles and their averages across Q in {2, 4, 8};
//! * `power_offset` — average SIR as a function of the power offset between
//!   the numerologies (individual CP, Q = 2);
//! * `cross_validation` — closed forms against the tone-by-tone chain
//!   measurement over the whole default grid plus one off-default cell.
//!
//! CSV rows are `scenario,sweep_param,sweep_value,cp_mode,victim,subcarrier,
//! ini_db,sir_db,source`. Exact zero power is emitted as the literal token
//! `-inf`, infinite SIR as `inf`. Output is byte-stable for a fixed spec and
//! seed, independent of the worker count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analytic::{self, to_db, IniDirection, Victim};
use crate::error::{Error, Result};
use crate::numerology::{CpMode, MultiplexPair, ValidatedPair};
use crate::simulate::{self, EnsembleOptions, RngSpec};

/// Which engine(s) produce rows. `Both` pairs the closed forms with the
/// deterministic single-tone measurement; `MonteCarlo` uses the seeded
/// ensemble instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    MonteCarlo,
    Both,
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "montecarlo" => Ok(Engine::MonteCarlo),
            "both" => Ok(Engine::Both),
            other => Err(Error::BadConfig(format!(
                "engine must be analytic|montecarlo|both, got '{other}'"
            ))),
        }
    }
}

/// The parameter a scenario varies.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    None,
    Q(Vec<usize>),
    PowerOffsetDb { start: f64, stop: f64, step: f64 },
    CpModes(Vec<CpMode>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScenarioKind {
    PerSubcarrierIni,
    QSweep,
    PowerOffset,
    CrossValidation,
}

/// A runnable experiment description.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub base: MultiplexPair,
    pub sweep: Sweep,
    pub engine: Engine,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads for ensemble runs; 0 = available parallelism.
    pub workers: usize,
    kind: ScenarioKind,
}

impl ScenarioSpec {
    /// Interference per subcarrier for both CP framings. The spacing ratio
    /// defaults to 4, which makes the Q-periodic oscillation and the zero
    /// lattice unambiguous in the output; it is recorded in the summary.
    pub fn per_subcarrier_ini() -> ScenarioSpec {
        ScenarioSpec {
            name: "per_subcarrier_ini".into(),
            base: MultiplexPair {
                q: 4,
                ..MultiplexPair::default()
            },
            sweep: Sweep::CpModes(vec![CpMode::Individual, CpMode::Common]),
            engine: Engine::Both,
            trials: 10_000,
            seed: 1,
            workers: 0,
            kind: ScenarioKind::PerSubcarrierIni,
        }
    }

    /// Per-subcarrier and average interference across Q in {2, 4, 8}.
    pub fn q_sweep() -> ScenarioSpec {
        ScenarioSpec {
            name: "q_sweep".into(),
            base: MultiplexPair::default(),
            sweep: Sweep::Q(vec![2, 4, 8]),
            engine: Engine::Both,
            trials: 10_000,
            seed: 1,
            workers: 0,
            kind: ScenarioKind::QSweep,
        }
    }

    /// Average SIR as a function of the power offset, individual CP, Q = 2.
    /// Offsets are applied symmetrically about equal unit power.
    pub fn power_offset() -> ScenarioSpec {
        ScenarioSpec {
            name: "power_offset".into(),
            base: MultiplexPair::default(),
            sweep: Sweep::PowerOffsetDb {
                start: -12.0,
                stop: 12.0,
                step: 3.0,
            },
            engine: Engine::Analytic,
            trials: 10_000,
            seed: 1,
            workers: 0,
            kind: ScenarioKind::PowerOffset,
        }
    }

    /// Closed forms against the single-tone chain over Q in {1, 2, 4, 8} and
    /// both CP modes, plus an off-default cell that exercises the reduced
    /// kernel form's integrality gap.
    pub fn cross_validation() -> ScenarioSpec {
        ScenarioSpec {
            name: "cross_validation".into(),
            base: MultiplexPair::default(),
            sweep: Sweep::Q(vec![1, 2, 4, 8]),
            engine: Engine::Both,
            trials: 10_000,
            seed: 1,
            workers: 0,
            kind: ScenarioKind::CrossValidation,
        }
    }

    pub fn names() -> [&'static str; 4] {
        [
            "per_subcarrier_ini",
            "q_sweep",
            "power_offset",
            "cross_validation",
        ]
    }

    pub fn by_name(name: &str) -> Option<ScenarioSpec> {
        match name {
            "per_subcarrier_ini" => Some(ScenarioSpec::per_subcarrier_ini()),
            "q_sweep" => Some(ScenarioSpec::q_sweep()),
            "power_offset" => Some(ScenarioSpec::power_offset()),
            "cross_validation" => Some(ScenarioSpec::cross_validation()),
            _ => None,
        }
    }

    pub fn run(&self) -> Result<ScenarioResult> {
        match self.kind {
            ScenarioKind::PerSubcarrierIni => run_per_subcarrier_ini(self),
            ScenarioKind::QSweep => run_q_sweep(self),
            ScenarioKind::PowerOffset => run_power_offset(self),
            ScenarioKind::CrossValidation => run_cross_validation(self),
        }
    }

    fn ensemble_options(&self) -> EnsembleOptions {
        EnsembleOptions {
            trials: self.trials,
            rng: RngSpec { seed: self.seed },
            workers: self.workers,
            ..Default::default()
        }
    }
}

/// Which engine produced a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    Mc,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Mc => "mc",
        }
    }
}

/// One victim subcarrier under one sweep point. Powers are kept linear;
/// dB tokens are produced at CSV time.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub sweep_param: String,
    pub sweep_value: String,
    pub cp_mode: CpMode,
    pub victim: Victim,
    /// The victim's native subcarrier index (N-grid for NSN, M-grid for WSN).
    pub subcarrier: usize,
    pub ini_linear: f64,
    pub sir_linear: f64,
    pub source: Source,
}

/// Rows plus a flat key/value summary block.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub scenario: String,
    pub rows: Vec<ResultRow>,
    summary: Vec<(String, String)>,
}

fn db_token(linear: f64) -> String {
    if linear == 0.0 {
        "-inf".into()
    } else if linear.is_infinite() {
        "inf".into()
    } else {
        format!("{}", to_db(linear))
    }
}

impl ScenarioResult {
    fn new(scenario: &str) -> ScenarioResult {
        ScenarioResult {
            scenario: scenario.into(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    fn push_summary_num(&mut self, key: impl Into<String>, value: f64) {
        let rendered = if value.is_infinite() {
            if value > 0.0 {
                "\"inf\"".into()
            } else {
                "\"-inf\"".into()
            }
        } else if value != 0.0 && value.abs() < 1e-3 {
            format!("{value:e}")
        } else {
            format!("{value}")
        };
        self.summary.push((key.into(), rendered));
    }

    fn push_summary_int(&mut self, key: impl Into<String>, value: usize) {
        self.summary.push((key.into(), format!("{value}")));
    }

    fn push_summary_str(&mut self, key: impl Into<String>, value: &str) {
        self.summary.push((key.into(), format!("\"{value}\"")));
    }

    pub fn summary(&self) -> &[(String, String)] {
        &self.summary
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Render all rows as CSV, header included.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scenario,sweep_param,sweep_value,cp_mode,victim,subcarrier,ini_db,sir_db,source\n",
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.scenario,
                row.sweep_param,
                row.sweep_value,
                row.cp_mode.label(),
                row.victim.label(),
                row.subcarrier,
                db_token(row.ini_linear),
                db_token(row.sir_linear),
                row.source.label()
            );
        }
        out
    }

    /// Render the summary as one JSON-like block.
    pub fn summary_text(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"scenario\": \"{}\",", self.scenario);
        for (i, (key, value)) in self.summary.iter().enumerate() {
            let comma = if i + 1 == self.summary.len() { "" } else { "," };
            let _ = writeln!(out, "  \"{key}\": {value}{comma}");
        }
        out.push_str("}\n");
        out
    }

    /// Write `<name>.csv` and `<name>_summary.txt` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let csv_path = dir.join(format!("{}.csv", self.scenario));
        let summary_path = dir.join(format!("{}_summary.txt", self.scenario));
        std::fs::write(&csv_path, self.to_csv())
            .map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
        std::fs::write(&summary_path, self.summary_text())
            .map_err(|e| Error::Io(format!("{}: {e}", summary_path.display())))?;
        Ok((csv_path, summary_path))
    }
}

/// Per-victim totals for one (pair, cp_mode) from the requested engine.
struct ProfilePair {
    nsn_totals: Vec<f64>,
    wsn_totals: Vec<f64>,
}

fn analytic_profiles(pair: &ValidatedPair, cp_mode: CpMode) -> ProfilePair {
    ProfilePair {
        nsn_totals: analytic::ini_matrix(pair, IniDirection::WsnToNsn, cp_mode).per_victim_totals(),
        wsn_totals: analytic::ini_matrix(pair, IniDirection::NsnToWsn, cp_mode).per_victim_totals(),
    }
}

fn single_tone_profiles(pair: &ValidatedPair, cp_mode: CpMode) -> ProfilePair {
    ProfilePair {
        nsn_totals: simulate::measure_ini_matrix(pair, cp_mode, IniDirection::WsnToNsn)
            .per_victim_totals(),
        wsn_totals: simulate::measure_ini_matrix(pair, cp_mode, IniDirection::NsnToWsn)
            .per_victim_totals(),
    }
}

fn ensemble_profiles(
    pair: &ValidatedPair,
    cp_mode: CpMode,
    opts: &EnsembleOptions,
) -> Result<ProfilePair> {
    Ok(ProfilePair {
        nsn_totals: simulate::measure_ini_ensemble(pair, cp_mode, IniDirection::WsnToNsn, opts)?
            .per_victim_ini,
        wsn_totals: simulate::measure_ini_ensemble(pair, cp_mode, IniDirection::NsnToWsn, opts)?
            .per_victim_ini,
    })
}

fn push_profile_rows(
    result: &mut ScenarioResult,
    pair: &ValidatedPair,
    cp_mode: CpMode,
    sweep_param: &str,
    sweep_value: &str,
    source: Source,
    profiles: &ProfilePair,
) {
    for (v, &total) in profiles.nsn_totals.iter().enumerate() {
        result.rows.push(ResultRow {
            sweep_param: sweep_param.into(),
            sweep_value: sweep_value.into(),
            cp_mode,
            victim: Victim::Nsn,
            subcarrier: v,
            ini_linear: total,
            sir_linear: if total == 0.0 {
                f64::INFINITY
            } else {
                pair.power_nsn() / total
            },
            source,
        });
    }
    for (i, &total) in profiles.wsn_totals.iter().enumerate() {
        result.rows.push(ResultRow {
            sweep_param: sweep_param.into(),
            sweep_value: sweep_value.into(),
            cp_mode,
            victim: Victim::Wsn,
            subcarrier: pair.wsn_base_bin() + i,
            ini_linear: total,
            sir_linear: if total == 0.0 {
                f64::INFINITY
            } else {
                pair.power_wsn() / total
            },
            source,
        });
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Emit analytic rows and, per the engine, measured rows for one sweep point.
/// Returns the worst analytic-vs-measured deviation when both were produced.
fn emit_point(
    result: &mut ScenarioResult,
    spec: &ScenarioSpec,
    pair: &ValidatedPair,
    cp_mode: CpMode,
    sweep_param: &str,
    sweep_value: &str,
) -> Result<Option<f64>> {
    let analytic_profiles_point = analytic_profiles(pair, cp_mode);
    if spec.engine != Engine::MonteCarlo {
        push_profile_rows(
            result,
            pair,
            cp_mode,
            sweep_param,
            sweep_value,
            Source::Analytic,
            &analytic_profiles_point,
        );
    }
    let measured = match spec.engine {
        Engine::Analytic => None,
        Engine::Both => Some(single_tone_profiles(pair, cp_mode)),
        Engine::MonteCarlo => Some(ensemble_profiles(pair, cp_mode, &spec.ensemble_options())?),
    };
    if let Some(measured) = measured {
        push_profile_rows(
            result,
            pair,
            cp_mode,
            sweep_param,
            sweep_value,
            Source::Mc,
            &measured,
        );
        let err =
            simulate::relative_error(&measured.nsn_totals, &analytic_profiles_point.nsn_totals)
                .max(simulate::relative_error(
                    &measured.wsn_totals,
                    &analytic_profiles_point.wsn_totals,
                ));
        return Ok(Some(err));
    }
    Ok(None)
}

fn run_per_subcarrier_ini(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    let pair = spec.base.clone().validate()?;
    let mut result = ScenarioResult::new(&spec.name);
    let Sweep::CpModes(modes) = &spec.sweep else {
        return Err(Error::BadConfig(
            "per_subcarrier_ini sweeps cp modes".into(),
        ));
    };
    result.push_summary_int("q", pair.q());
    result.push_summary_int("n_fft", pair.n());
    let mut worst = 0.0f64;
    let mut compared = false;
    for &cp_mode in modes {
        let profiles = analytic_profiles(&pair, cp_mode);
        if let Some(err) = emit_point(
            &mut result,
            spec,
            &pair,
            cp_mode,
            "cp_mode",
            cp_mode.label(),
        )? {
            worst = worst.max(err);
            compared = true;
        }
        let label = cp_mode.label();
        result.push_summary_num(
            format!("avg_ini_nsn_{label}_db"),
            to_db(mean(&profiles.nsn_totals)),
        );
        result.push_summary_num(
            format!("avg_ini_wsn_{label}_db"),
            to_db(mean(&profiles.wsn_totals)),
        );
        let zero_victims = profiles.nsn_totals.iter().filter(|&&t| t == 0.0).count();
        result.push_summary_int(format!("zero_ini_nsn_victims_{label}"), zero_victims);
    }
    if compared {
        result.push_summary_num("max_rel_err", worst);
    }
    Ok(result)
}

fn run_q_sweep(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    let Sweep::Q(q_values) = &spec.sweep else {
        return Err(Error::BadConfig("q_sweep sweeps q".into()));
    };
    let mut result = ScenarioResult::new(&spec.name);
    let mut worst = 0.0f64;
    let mut compared = false;
    for &q in q_values {
        let pair = MultiplexPair {
            q,
            ..spec.base.clone()
        }
        .validate()?;
        let value = format!("{q}");
        for cp_mode in [CpMode::Individual, CpMode::Common] {
            let profiles = analytic_profiles(&pair, cp_mode);
            if let Some(err) = emit_point(&mut result, spec, &pair, cp_mode, "q", &value)? {
                worst = worst.max(err);
                compared = true;
            }
            let label = cp_mode.label();
            result.push_summary_num(
                format!("avg_ini_nsn_{label}_q{q}_db"),
                to_db(mean(&profiles.nsn_totals)),
            );
            result.push_summary_num(
                format!("avg_ini_wsn_{label}_q{q}_db"),
                to_db(mean(&profiles.wsn_totals)),
            );
        }
    }
    if compared {
        result.push_summary_num("max_rel_err", worst);
    }
    Ok(result)
}

fn offset_values(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let mut values = Vec::new();
    let mut v = start;
    while v <= stop + 1e-9 {
        values.push(v);
        v += step;
    }
    values
}

fn run_power_offset(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    let Sweep::PowerOffsetDb { start, stop, step } = spec.sweep else {
        return Err(Error::BadConfig("power_offset sweeps a dB range".into()));
    };
    let mut result = ScenarioResult::new(&spec.name);
    result.push_summary_int("q", spec.base.q);
    for offset in offset_values(start, stop, step) {
        // split the offset symmetrically about equal unit power
        let config = MultiplexPair {
            power_nsn: analytic::from_db(offset / 2.0),
            power_wsn: analytic::from_db(-offset / 2.0),
            ..spec.base.clone()
        };
        let pair = config.validate()?;
        let cp_mode = pair.cp_mode();
        let value = format!("{offset}");
        emit_point(&mut result, spec, &pair, cp_mode, "power_offset_db", &value)?;
        let metrics = analytic::average_metrics(&pair, cp_mode);
        let tag = format!("offset_{offset}_db");
        result.push_summary_num(format!("avg_sir_nsn_{tag}"), metrics.avg_sir_nsn_db);
        result.push_summary_num(format!("avg_sir_wsn_{tag}"), metrics.avg_sir_wsn_db);
        result.push_summary_num(format!("avg_sir_system_{tag}"), metrics.avg_sir_system_db);
    }
    Ok(result)
}

/// Closed-form profiles and averages for one configuration, packaged as a
/// writable result (the CLI's `analytic` command).
pub fn adhoc_analytic(config: &MultiplexPair) -> Result<ScenarioResult> {
    let pair = config.clone().validate()?;
    let cp_mode = pair.cp_mode();
    let mut result = ScenarioResult::new("analytic");
    let profiles = analytic_profiles(&pair, cp_mode);
    push_profile_rows(
        &mut result,
        &pair,
        cp_mode,
        "none",
        "",
        Source::Analytic,
        &profiles,
    );
    result.push_summary_int("n_fft", pair.n());
    result.push_summary_int("q", pair.q());
    result.push_summary_str("cp_mode", cp_mode.label());
    let metrics = analytic::average_metrics(&pair, cp_mode);
    result.push_summary_num("avg_ini_nsn_db", to_db(metrics.avg_ini_nsn));
    result.push_summary_num("avg_ini_wsn_db", to_db(metrics.avg_ini_wsn));
    result.push_summary_num("avg_sir_nsn_db", metrics.avg_sir_nsn_db);
    result.push_summary_num("avg_sir_wsn_db", metrics.avg_sir_wsn_db);
    result.push_summary_num("avg_sir_system_db", metrics.avg_sir_system_db);
    result.push_summary_int("infinite_sir_nsn_victims", metrics.infinite_sir_nsn);
    result.push_summary_int("infinite_sir_wsn_victims", metrics.infinite_sir_wsn);
    Ok(result)
}

/// Ensemble-measured profiles for one configuration (the CLI's `montecarlo`
/// command), with the deviation from the closed forms in the summary.
pub fn adhoc_montecarlo(config: &MultiplexPair, opts: &EnsembleOptions) -> Result<ScenarioResult> {
    let pair = config.clone().validate()?;
    let cp_mode = pair.cp_mode();
    let mut result = ScenarioResult::new("montecarlo");
    let analytic_reference = analytic_profiles(&pair, cp_mode);
    let measured = ensemble_profiles(&pair, cp_mode, opts)?;
    push_profile_rows(
        &mut result,
        &pair,
        cp_mode,
        "none",
        "",
        Source::Mc,
        &measured,
    );
    result.push_summary_int("n_fft", pair.n());
    result.push_summary_int("q", pair.q());
    result.push_summary_str("cp_mode", cp_mode.label());
    result.push_summary_int("trials", opts.trials);
    result
        .summary
        .push(("seed".into(), format!("{}", opts.rng.seed)));
    result.push_summary_num("avg_ini_nsn_db", to_db(mean(&measured.nsn_totals)));
    result.push_summary_num("avg_ini_wsn_db", to_db(mean(&measured.wsn_totals)));
    let err = simulate::relative_error(&measured.nsn_totals, &analytic_reference.nsn_totals).max(
        simulate::relative_error(&measured.wsn_totals, &analytic_reference.wsn_totals),
    );
    result.push_summary_num("max_rel_err_vs_analytic", err);
    Ok(result)
}

fn run_cross_validation(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    let Sweep::Q(q_values) = &spec.sweep else {
        return Err(Error::BadConfig("cross_validation sweeps q".into()));
    };
    let mut result = ScenarioResult::new(&spec.name);
    let mut overall = 0.0f64;
    for &q in q_values {
        let pair = MultiplexPair {
            q,
            ..spec.base.clone()
        }
        .validate()?;
        let value = format!("{q}");
        for cp_mode in [CpMode::Individual, CpMode::Common] {
            emit_point(&mut result, spec, &pair, cp_mode, "q", &value)?;
            let report = simulate::cross_validate_detailed(&pair, cp_mode);
            overall = overall.max(report.max_rel_err);
            let label = cp_mode.label();
            result.push_summary_num(format!("max_rel_err_q{q}_{label}"), report.max_rel_err);
            result.push_summary_num(
                format!("reduced_kernel_max_rel_err_q{q}_{label}"),
                report.reduced_form_max_rel_err,
            );
        }
    }
    // off-default cell probing the reduced kernel's integrality assumption
    let probe = MultiplexPair {
        n_fft: 64,
        q: 4,
        eta_nsn: 0.25,
        eta_wsn: 0.75,
        cp_ratio: 1.0 / 8.0,
        ..MultiplexPair::default()
    }
    .validate()?;
    for cp_mode in [CpMode::Individual, CpMode::Common] {
        emit_point(
            &mut result,
            spec,
            &probe,
            cp_mode,
            "cell",
            "n64_eta0.25_cpr0.125_q4",
        )?;
        let report = simulate::cross_validate_detailed(&probe, cp_mode);
        overall = overall.max(report.max_rel_err);
        let label = cp_mode.label();
        result.push_summary_num(format!("max_rel_err_probe_{label}"), report.max_rel_err);
        result.push_summary_num(
            format!("reduced_kernel_max_rel_err_probe_{label}"),
            report.reduced_form_max_rel_err,
        );
        if cp_mode == CpMode::Individual {
            let flag = if report.reduced_form_max_rel_err > 1e-9 {
                "yes"
            } else {
                "no"
            };
            result.push_summary_str("reduced_kernel_deviates_on_probe", flag);
        }
    }
    result.push_summary_num("overall_max_rel_err", overall);
    Ok(result)
}
