use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tetraqkd::harness::{run, ConfigError, ExperimentConfig, HarnessError, OUT_DIR_ENV};

const SCHEMAS: &str = "\
Output: one CSV table per run, preceded by '#' lines with the version, mode,
seed and config hash. Noise values are written with 12 significant digits.

CSV columns by mode:
  analytic     eps, accessible_info_ab, six_state_i_ab, i_ab_total,
               i_ab_tail_bound, i_ae_total, yield, then eps_n, i_ab_n, i_ae_n
               for n = 1..max-iter
  compare      eps, singapore_i_ab, singapore_i_ae, singapore_yield,
               six_state_i_ab, six_state_i_ae, six_state_yield
               (six-state Eve columns are empty without --overlay-sixstate-eve)
  threshold    n_max, threshold, tolerance (one row per n_max = 1..max-iter)
  tomography   eps, row, col, re, im, exact_re, exact_im, abs_dev
               (16 rows per noise value)
  povm-check   eps, eta, eta_born, table_dev, info4, mu, info_eve, gain,
               relative_gain
  simulate     eps, n, eps_n, eps_n_est, eps_n_stderr, q_n, p_succ, p_succ_est,
               p_succ_stderr, p_err, p_err_est, p_err_stderr, i_ab, i_ab_est,
               i_ab_stderr, input, keyed, recycled, discarded, bits, errors,
               same_letter, balanced, keybit_i_ab, keybit_i_ab_est,
               keybit_i_ab_stderr, keybit_i_ab_bias, keybit_i_ae_view,
               keybit_i_ae_view_est, keybit_i_ae_view_stderr,
               keybit_i_ae_view_bias, keybit_i_ae_independent
               (one row per round; Eve columns only on round 1)

The overlay CSV needs columns 'eps' and 'i_ae'; '#' lines are skipped.

Without --out, the table goes to $TETRAQKD_OUT_DIR/<mode>.csv when that
variable is set and to stdout otherwise.

Exit status: 0 success, 2 configuration error, 3 numerical invariant
violated, 1 i/o error.";

/// Exact analytics and Monte Carlo runs for the tetrahedron key
/// distribution protocol.
#[derive(Debug, Parser)]
#[command(name = "tetraqkd", version, after_long_help = SCHEMAS)]
struct Cli {
    /// analytic | simulate | threshold | tomography | povm-check | compare
    mode: Option<String>,

    /// Single noise value (decimal or fraction such as 2/3)
    #[arg(long, conflicts_with = "eps_grid", allow_hyphen_values = true)]
    eps: Option<String>,

    /// Inclusive noise grid START:STOP:STEP
    #[arg(long)]
    eps_grid: Option<String>,

    /// Transmitted pairs per noise value (simulate, tomography)
    #[arg(long)]
    pairs: Option<String>,

    /// Number of key-generation rounds
    #[arg(long)]
    max_iter: Option<String>,

    #[arg(long)]
    seed: Option<String>,

    /// Gauge phase of the purification
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,

    /// Eve's measurement: four | optimal | fixed:MU
    #[arg(long)]
    mu_policy: Option<String>,

    /// Bootstrap resamples for empirical mutual information
    #[arg(long)]
    bootstrap: Option<String>,

    #[arg(long)]
    out: Option<PathBuf>,

    /// CSV with the six-state protocol's Eve information (compare mode)
    #[arg(long)]
    overlay_sixstate_eve: Option<PathBuf>,

    /// Flat key = value file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,

    /// Print the resolved configuration and exit
    #[arg(long)]
    dump_config: bool,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_file_contents(&text)?;
    }
    let flags: [(&str, Option<String>); 9] = [
        ("mode", cli.mode.clone()),
        ("eps", cli.eps.clone()),
        ("eps_grid", cli.eps_grid.clone()),
        ("pairs", cli.pairs.clone()),
        ("max_iter", cli.max_iter.clone()),
        ("seed", cli.seed.clone()),
        ("phi", cli.phi.clone()),
        ("mu_policy", cli.mu_policy.clone()),
        ("bootstrap", cli.bootstrap.clone()),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if let Some(p) = &cli.out {
        cfg.out = Some(p.clone());
    }
    if let Some(p) = &cli.overlay_sixstate_eve {
        cfg.overlay = Some(p.clone());
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("tetraqkd: configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.dump_config {
        print!("{}", cfg.dump());
        return ExitCode::SUCCESS;
    }
    if cli.mode.is_none() && cli.config.is_none() {
        eprintln!("tetraqkd: no mode given (see --help; {OUT_DIR_ENV} sets the output directory)");
        return ExitCode::from(2);
    }
    match run(&cfg) {
        Ok(out) => {
            match &out.written_to {
                Some(path) => {
                    for line in &out.report.summary {
                        println!("{line}");
                    }
                    println!("wrote {}", path.display());
                }
                None => {
                    for line in &out.report.summary {
                        eprintln!("{line}");
                    }
                    match out.report.to_csv() {
                        Ok(csv) => print!("{csv}"),
                        Err(e) => return fail(&e),
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &HarnessError) -> ExitCode {
    eprintln!("tetraqkd: {e}");
    ExitCode::from(e.exit_code() as u8)
}
