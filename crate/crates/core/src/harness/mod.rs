//! Experiment runner behind the command-line tool.
//!
//! Every mode produces one CSV table preceded by a `#` comment block with
//! the crate version, mode, seed and config hash. Grid points are evaluated
//! in parallel and written in grid order; Monte Carlo point `i` of a grid
//! uses random stream `i` of the configured seed, so output bodies depend
//! only on the configuration.

pub mod config;
pub mod estimate;
pub mod three_party;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::channel::{
    accessible_info_ab, joint_probs_ab, reconstruct_state, rho_ab, JointTable, NoiseParameter,
};
use crate::error::Error;
use crate::eve::{
    alice_eve_joint, alice_eve_table, check_purification, eta, eta_from_table, eve_letter_info,
    eve_povm4, eve_povm5, five_member_boundary, optimize_mu, PurificationParams,
};
use crate::keygen::{fmt_f, i_ab_total, i_key, IterationReport};
use crate::sampling::{derive_rng, TableSampler};
use crate::security::{
    ck_yield, keybit_info_from_eta, six_state_iab, threshold, LetterGrouping, THRESHOLD_TOL,
};

pub use config::{ConfigError, EpsSpec, ExperimentConfig, Mode, MuPolicy};
pub use estimate::{empirical_mi, CountTable, MiEstimate};
pub use three_party::{
    exact_view_keybit_info, sample_independent_model, sample_run, simulate, triple_distribution,
    EveMeasurement, SampleRecord, SimulationOutcome,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TETRAQKD_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical invariant violated: {0}")]
    Numerical(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

type HResult<T> = std::result::Result<T, HarnessError>;

/// A finished table plus human-readable summary lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub mode: Mode,
    pub header: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<String>,
}

impl Report {
    fn new(config: &ExperimentConfig, columns: Vec<String>) -> Self {
        Self {
            mode: config.mode,
            header: vec![
                format!("tetraqkd {}", env!("CARGO_PKG_VERSION")),
                format!("mode: {}", config.mode),
                format!("seed: {}", config.seed),
                format!("config_hash: {}", config.hash()),
            ],
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    /// CSV body without the comment block.
    pub fn body(&self) -> HResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
    }

    pub fn to_csv(&self) -> HResult<String> {
        let mut out: String = self.header.iter().map(|h| format!("# {h}\n")).collect();
        out.push_str(&self.body()?);
        Ok(out)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn noise(e: f64) -> HResult<NoiseParameter> {
    NoiseParameter::new(e).map_err(|err| ConfigError(err.to_string()).into())
}

/// Where `run` writes: the configured path, else `<$TETRAQKD_OUT_DIR>/<mode>.csv`,
/// else nowhere (the caller prints to stdout).
pub fn output_path(config: &ExperimentConfig) -> Option<PathBuf> {
    config.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| Path::new(&d).join(format!("{}.csv", config.mode)))
    })
}

/// Validates the configuration and computes the mode's report.
pub fn execute(config: &ExperimentConfig) -> HResult<Report> {
    config.validate()?;
    match config.mode {
        Mode::Analytic => analytic(config),
        Mode::Simulate => simulate_mode(config),
        Mode::Threshold => threshold_mode(config),
        Mode::Tomography => tomography(config),
        Mode::PovmCheck => povm_check(config),
        Mode::Compare => compare(config),
    }
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub written_to: Option<PathBuf>,
}

/// Executes the configuration and writes the CSV to [`output_path`] when
/// one is set.
pub fn run(config: &ExperimentConfig) -> HResult<RunOutput> {
    let report = execute(config)?;
    let written_to = output_path(config);
    if let Some(path) = &written_to {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut f = fs::File::create(path)?;
        f.write_all(report.to_csv()?.as_bytes())?;
    }
    Ok(RunOutput { report, written_to })
}

fn analytic(config: &ExperimentConfig) -> HResult<Report> {
    let n_max = config.max_iter;
    let mut columns = cols(&[
        "eps",
        "accessible_info_ab",
        "six_state_i_ab",
        "i_ab_total",
        "i_ab_tail_bound",
        "i_ae_total",
        "yield",
    ]);
    for n in 1..=n_max {
        columns.push(format!("eps_{n}"));
        columns.push(format!("i_ab_{n}"));
        columns.push(format!("i_ae_{n}"));
    }
    let mut report = Report::new(config, columns);
    let rows: Vec<HResult<Vec<String>>> = config
        .eps
        .points()
        .into_par_iter()
        .map(|e| {
            let eps = noise(e)?;
            let y = ck_yield(eps, n_max)?;
            let ab = i_ab_total(eps, n_max)?;
            let mut row = vec![
                fmt_f(e),
                fmt_f(accessible_info_ab(eps)),
                fmt_f(six_state_iab(eps)),
                fmt_f(y.i_ab_total),
                fmt_f(ab.tail_bound),
                fmt_f(y.i_ae_total),
                fmt_f(y.yield_ck),
            ];
            for (t, it) in ab.terms.iter().zip(&y.per_iteration) {
                row.push(fmt_f(t.eps_n));
                row.push(fmt_f(it.i_ab));
                row.push(fmt_f(it.i_ae));
            }
            Ok(row)
        })
        .collect();
    report.rows = rows.into_iter().collect::<HResult<_>>()?;
    report
        .summary
        .push(format!("{} noise values, {n_max} rounds", report.rows.len()));
    Ok(report)
}

fn threshold_mode(config: &ExperimentConfig) -> HResult<Report> {
    let mut report = Report::new(config, cols(&["n_max", "threshold", "tolerance"]));
    let found: Vec<HResult<(u32, f64)>> = (1..=config.max_iter)
        .into_par_iter()
        .map(|n| Ok((n, threshold(n, THRESHOLD_TOL)?)))
        .collect();
    for item in found {
        let (n, t) = item?;
        report
            .rows
            .push(vec![n.to_string(), fmt_f(t), fmt_f(THRESHOLD_TOL)]);
        report
            .summary
            .push(format!("threshold(n_max = {n}) = {t:.6} ± {THRESHOLD_TOL:e}"));
    }
    Ok(report)
}

fn tomography(config: &ExperimentConfig) -> HResult<Report> {
    let mut report = Report::new(
        config,
        cols(&[
            "eps", "row", "col", "re", "im", "exact_re", "exact_im", "abs_dev",
        ]),
    );
    let points = config.eps.points();
    let results: Vec<HResult<(Vec<Vec<String>>, String)>> = points
        .par_iter()
        .enumerate()
        .map(|(i, &e)| {
            let eps = noise(e)?;
            let exact_table = joint_probs_ab(eps);
            let exact = rho_ab(eps);
            let round_trip = reconstruct_state(&exact_table)?.max_abs_diff(&exact);
            if round_trip > crate::qmath::OPERATOR_TOL {
                return Err(Error::Invariant(format!(
                    "exact tomography round trip deviates by {round_trip:e}"
                ))
                .into());
            }
            let sampler = TableSampler::new(&exact_table)?;
            let mut rng = derive_rng(config.seed, i as u64);
            let mut counts = vec![0u64; 16];
            for _ in 0..config.pairs {
                counts[sampler.sample_flat(&mut rng)] += 1;
            }
            let empirical = JointTable::from_counts(
                exact_table.parties().to_vec(),
                exact_table.labels().to_vec(),
                &counts,
            )?;
            let rho = reconstruct_state(&empirical)?;
            let mut rows = Vec::with_capacity(16);
            let mut max_dev: f64 = 0.0;
            for r in 0..4 {
                for c in 0..4 {
                    let z = rho.matrix()[(r, c)];
                    let x = exact.matrix()[(r, c)];
                    let dev = (z - x).norm();
                    max_dev = max_dev.max(dev);
                    rows.push(vec![
                        fmt_f(e),
                        r.to_string(),
                        c.to_string(),
                        fmt_f(z.re),
                        fmt_f(z.im),
                        fmt_f(x.re),
                        fmt_f(x.im),
                        fmt_f(dev),
                    ]);
                }
            }
            let line = format!(
                "eps = {e:.4}: max entry deviation {max_dev:.3e} over {} pairs, min eigenvalue {:.3e}",
                config.pairs,
                rho.min_eigenvalue()
            );
            Ok((rows, line))
        })
        .collect();
    for r in results {
        let (rows, line) = r?;
        report.rows.extend(rows);
        report.summary.push(line);
    }
    Ok(report)
}

fn povm_check(config: &ExperimentConfig) -> HResult<Report> {
    let mut report = Report::new(
        config,
        cols(&[
            "eps",
            "eta",
            "eta_born",
            "table_dev",
            "info4",
            "mu",
            "info_eve",
            "gain",
            "relative_gain",
        ]),
    );
    let phi = config.phi;
    let rows: Vec<HResult<Vec<String>>> = config
        .eps
        .points()
        .into_par_iter()
        .map(|e| {
            let eps = noise(e)?;
            let params = PurificationParams::new(eps, phi)?;
            check_purification(&params)?;
            let born = alice_eve_table(&params, &eve_povm4(phi))?;
            let dev = born.max_abs_diff(&alice_eve_joint(eps)?);
            if dev > crate::qmath::OPERATOR_TOL {
                return Err(Error::Invariant(format!(
                    "Alice-Eve Born table deviates from the eta form by {dev:e}"
                ))
                .into());
            }
            let info4 = eve_letter_info(&params, &eve_povm4(phi))?;
            let (mu, info_eve) = match config.mu_policy {
                MuPolicy::Four => (0.0, info4),
                MuPolicy::Fixed(mu) => (mu, eve_letter_info(&params, &eve_povm5(phi, mu)?)?),
                MuPolicy::Optimal if e > 0.0 && e < crate::channel::SEPARABLE_NOISE => {
                    let opt = optimize_mu(eps, phi)?;
                    (opt.mu, opt.info5)
                }
                MuPolicy::Optimal => (0.0, info4),
            };
            let gain = info_eve - info4;
            let rel = if info4 > 0.0 { gain / info4 } else { 0.0 };
            Ok(vec![
                fmt_f(e),
                fmt_f(eta(eps)?),
                fmt_f(eta_from_table(&born)?),
                fmt_f(dev),
                fmt_f(info4),
                fmt_f(mu),
                fmt_f(info_eve),
                fmt_f(gain),
                fmt_f(rel),
            ])
        })
        .collect();
    report.rows = rows.into_iter().collect::<HResult<_>>()?;
    report.summary.push(format!(
        "{} noise values: purification, Gram law and Alice-Eve table checks passed",
        report.rows.len()
    ));
    if config.mu_policy == MuPolicy::Optimal {
        let boundary = five_member_boundary(phi, 0.05, 0.3, 1e-4)?;
        report
            .summary
            .push(format!("5-member POVM helps below eps = {boundary:.4}"));
    }
    Ok(report)
}

/// Six-state Eve information supplied from outside, `eps,i_ae` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    points: Vec<(f64, f64)>,
}

impl Overlay {
    /// Reads a CSV with `eps` and `i_ae` columns; `#` lines are comments.
    pub fn from_csv(text: &str) -> Result<Self, ConfigError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| ConfigError(format!("overlay: {e}")))?
            .clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| ConfigError(format!("overlay is missing column `{name}`")))
        };
        let (ie, iv) = (find("eps")?, find("i_ae")?);
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| ConfigError(format!("overlay: {e}")))?;
            let get = |i: usize| {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ConfigError(format!("overlay: bad row {:?}", rec)))
            };
            points.push((get(ie)?, get(iv)?));
        }
        if points.is_empty() {
            return Err(ConfigError("overlay has no rows".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { points })
    }

    /// Linear interpolation; `None` outside the supplied range.
    pub fn at(&self, eps: f64) -> Option<f64> {
        let first = self.points.first()?;
        let last = self.points.last()?;
        if eps < first.0 || eps > last.0 {
            return None;
        }
        let k = self.points.partition_point(|p| p.0 < eps);
        if k < self.points.len() && self.points[k].0 == eps {
            return Some(self.points[k].1);
        }
        let (x0, y0) = self.points[k - 1];
        let (x1, y1) = self.points[k];
        Some(y0 + (y1 - y0) * (eps - x0) / (x1 - x0))
    }
}

fn compare(config: &ExperimentConfig) -> HResult<Report> {
    let overlay = match &config.overlay {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            Some(Overlay::from_csv(&text)?)
        }
        None => None,
    };
    let mut report = Report::new(
        config,
        cols(&[
            "eps",
            "singapore_i_ab",
            "singapore_i_ae",
            "singapore_yield",
            "six_state_i_ab",
            "six_state_i_ae",
            "six_state_yield",
        ]),
    );
    let n_max = config.max_iter;
    let rows: Vec<HResult<Vec<String>>> = config
        .eps
        .points()
        .into_par_iter()
        .map(|e| {
            let eps = noise(e)?;
            let y = ck_yield(eps, n_max)?;
            let ab6 = six_state_iab(eps);
            let ae6 = overlay.as_ref().and_then(|o| o.at(e));
            Ok(vec![
                fmt_f(e),
                fmt_f(y.i_ab_total),
                fmt_f(y.i_ae_total),
                fmt_f(y.yield_ck),
                fmt_f(ab6),
                ae6.map(fmt_f).unwrap_or_default(),
                ae6.map(|v| fmt_f(ab6 - v)).unwrap_or_default(),
            ])
        })
        .collect();
    report.rows = rows.into_iter().collect::<HResult<_>>()?;
    report.summary.push(match &overlay {
        Some(o) => format!("six-state Eve overlay with {} points", o.points.len()),
        None => "no six-state Eve overlay supplied; its columns are empty".into(),
    });
    Ok(report)
}

fn simulate_mode(config: &ExperimentConfig) -> HResult<Report> {
    let mut columns: Vec<String> = vec!["eps".into()];
    columns.extend(IterationReport::CSV_HEADER.iter().map(|s| s.to_string()));
    columns.extend(cols(&[
        "keybit_i_ab",
        "keybit_i_ab_est",
        "keybit_i_ab_stderr",
        "keybit_i_ab_bias",
        "keybit_i_ae_view",
        "keybit_i_ae_view_est",
        "keybit_i_ae_view_stderr",
        "keybit_i_ae_view_bias",
        "keybit_i_ae_independent",
    ]));
    let mut report = Report::new(config, columns);
    let points = config.eps.points();
    let results: Vec<HResult<(Vec<Vec<String>>, Vec<String>)>> = points
        .par_iter()
        .enumerate()
        .map(|(i, &e)| simulate_point(config, i as u64, e))
        .collect();
    for r in results {
        let (rows, lines) = r?;
        report.rows.extend(rows);
        report.summary.extend(lines);
    }
    Ok(report)
}

fn simulate_point(
    config: &ExperimentConfig,
    stream: u64,
    e: f64,
) -> HResult<(Vec<Vec<String>>, Vec<String>)> {
    let eps = noise(e)?;
    let eve = EveMeasurement::from_policy(config.mu_policy, eps, config.phi)?;
    let triple = triple_distribution(eps, config.phi, eve)?;
    let mut rng = derive_rng(config.seed, stream);
    let sim = simulate(eps, &triple, config.pairs, config.max_iter, &mut rng)?;
    let view_exact = exact_view_keybit_info(&triple)?;
    let independent = keybit_info_from_eta(eta(eps)?, 1, LetterGrouping::default())?;

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (rep, counts) in sim.reports.iter().zip(&sim.key_counts) {
        let mut row = vec![fmt_f(e)];
        row.extend(rep.csv_row());
        let target = i_key(rep.analytic.p_err_n);
        match empirical_mi(counts, config.bootstrap, &mut rng) {
            Ok(est) => row.extend([
                fmt_f(target),
                fmt_f(est.bits),
                fmt_f(est.stderr),
                fmt_f(est.bias),
            ]),
            Err(_) => row.extend([fmt_f(target), String::new(), String::new(), String::new()]),
        }
        if rep.n == 1 {
            match empirical_mi(&sim.eve_view_counts, config.bootstrap, &mut rng) {
                Ok(est) => {
                    row.extend([
                        fmt_f(view_exact),
                        fmt_f(est.bits),
                        fmt_f(est.stderr),
                        fmt_f(est.bias),
                    ]);
                    lines.push(format!(
                        "eps = {e:.4}: Eve round-one key-bit information {:.5} ± {:.5} (exact {:.5}, independent-letter model {:.5})",
                        est.bits, est.stderr, view_exact, independent
                    ));
                }
                Err(_) => row.extend([fmt_f(view_exact), String::new(), String::new(), String::new()]),
            }
            row.push(fmt_f(independent));
        } else {
            row.extend(std::iter::repeat_n(String::new(), 5));
        }
        lines.push(format!(
            "eps = {e:.4}, round {}: {} bits, p_err {:.5} ± {:.5} (analytic {:.5}), i_ab {:.6} ± {:.6} (analytic {:.6})",
            rep.n, rep.bits, rep.p_err, rep.p_err_stderr, rep.analytic.p_err_n, rep.i_ab, rep.i_ab_stderr, rep.analytic.i_ab_n
        ));
        rows.push(row);
    }
    Ok((rows, lines))
}
