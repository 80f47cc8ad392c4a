use std::path::PathBuf;
use std::time::Instant;

use qdiv::divergence::{
    correlation_remap, divergence_isotropic_closed, divergence_isotropic_mc,
    divergence_remapped_mc, lower_bound, remapped_reference, Remap, BOUND_TOL,
};
use qdiv::haar::{moment_check, quadrature_volume, sample_haar, second_moment_reference, SamplerId};
use qdiv::hilbert::{expectation, ComplexOperator, Povm, EXACT_TOL};
use qdiv::scenarios::{
    bell_basis_check, polarization, prediction_game, qrng_generate, singlet_beamsplitter,
    JointStateSpec, NamedState,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{Cli, Command, Format, RemapName, DEFAULT_SEED};
use crate::report::{ConfigEcho, Report, ORIENTATION};
use crate::CliError;

/// Largest dimension for which `sample` runs the volume quadrature.
pub const QUADRATURE_MAX_DIM: usize = 4;
/// Volume normalization must match the dimension this closely.
pub const VOLUME_TOL: f64 = 1e-3;

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub shards: usize,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let c = &cli.common;
        let command = cli.command.clone();
        let qubit_only = matches!(
            command,
            Command::SingletDemo | Command::Qrng { .. } | Command::Predict { .. } | Command::BellBasis
        );
        let dim = c.dim.unwrap_or(2) as usize;
        if qubit_only && dim != 2 {
            return Err(CliError::Usage(format!(
                "{} is defined for --dim 2 only (got {dim})",
                command.name()
            )));
        }
        let default_samples = match command {
            Command::VerifyDecomposition { .. } => 200_000,
            _ => 100_000,
        };
        let default_tol = match command {
            Command::MeanDivergence { .. } => BOUND_TOL,
            Command::BellBasis => EXACT_TOL,
            Command::Predict { .. } => 0.02,
            _ => 0.01,
        };
        Ok(Self {
            command,
            dim,
            samples: c.samples.unwrap_or(default_samples) as usize,
            seed: c.seed.unwrap_or(DEFAULT_SEED),
            tolerance: c.tol.unwrap_or(default_tol),
            format: c.format,
            out: c.out.clone(),
            shards: c.shards as usize,
        })
    }

    fn echo(&self) -> ConfigEcho {
        let mut echo = ConfigEcho {
            dim: self.dim as u64,
            samples: self.samples as u64,
            seed: self.seed,
            tolerance: self.tolerance,
            format: self.format,
            shards: self.shards as u64,
            sampler: None,
            state: None,
            spec: None,
            remap: None,
        };
        match &self.command {
            Command::VerifyDecomposition { sampler } | Command::Sample { sampler } => {
                echo.sampler = Some(*sampler)
            }
            Command::MeanDivergence { state } => echo.state = Some(state.to_string()),
            Command::Qrng { state } => echo.state = Some(state.to_string()),
            Command::Predict { spec, remap } => {
                echo.spec = Some(*spec);
                echo.remap = Some(*remap);
            }
            Command::Remapped { spec, remap, sampler } => {
                echo.spec = Some(*spec);
                echo.remap = Some(*remap);
                echo.sampler = Some(*sampler);
            }
            Command::SingletDemo | Command::BellBasis => {}
        }
        echo
    }
}

struct Outcome {
    passed: bool,
    result: Map<String, Value>,
}

fn outcome(passed: bool, result: impl Serialize) -> Outcome {
    match serde_json::to_value(result).expect("results serialize") {
        Value::Object(result) => Outcome { passed, result },
        other => panic!("result payload must be an object, got {other}"),
    }
}

/// Runs the configured command and assembles its report.
pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let out = match &cfg.command {
        Command::VerifyDecomposition { sampler } => verify_decomposition(cfg, *sampler)?,
        Command::MeanDivergence { state } => mean_divergence(cfg, *state)?,
        Command::SingletDemo => singlet_demo(cfg)?,
        Command::Qrng { state } => qrng(cfg, state.as_str())?,
        Command::Predict { spec, remap } => predict(cfg, *spec, *remap)?,
        Command::Sample { sampler } => sample(cfg, *sampler)?,
        Command::Remapped { spec, remap, sampler } => remapped(cfg, *spec, *remap, *sampler)?,
        Command::BellBasis => bell_basis(cfg),
    };
    Ok(Report {
        command: cfg.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        eq6_orientation: ORIENTATION.to_string(),
        config: cfg.echo(),
        passed: out.passed,
        result: out.result,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

#[derive(Serialize)]
struct SpectrumEntry {
    value: f64,
    multiplicity: usize,
}

fn expected_spectrum(d: usize) -> Vec<SpectrumEntry> {
    vec![
        SpectrumEntry {
            value: lower_bound(d),
            multiplicity: d * (d + 1) / 2,
        },
        SpectrumEntry {
            value: 1.0,
            multiplicity: d * (d - 1) / 2,
        },
    ]
}

fn verify_decomposition(cfg: &RunConfig, sampler: SamplerId) -> Result<Outcome, CliError> {
    let d = cfg.dim;
    let closed = divergence_isotropic_closed(d)?;
    let mc = divergence_isotropic_mc(d, cfg.samples, cfg.seed, sampler, cfg.shards)?;
    let deviation = mc.op().max_abs_diff(closed.op());

    let eigen = closed.op().eigenvalues_hermitian();
    let lower = lower_bound(d);
    let n_sym = d * (d + 1) / 2;
    let spectrum_deviation = eigen
        .iter()
        .enumerate()
        .map(|(i, ev)| (ev - if i < n_sym { lower } else { 1.0 }).abs())
        .fold(0.0, f64::max);
    let spectrum: Vec<SpectrumEntry> = closed
        .op()
        .spectrum(1e-9)
        .into_iter()
        .map(|(value, multiplicity)| SpectrumEntry { value, multiplicity })
        .collect();
    let passed = deviation < cfg.tolerance && spectrum_deviation <= EXACT_TOL;
    Ok(outcome(
        passed,
        json!({
            "max_deviation": deviation,
            "spectrum": spectrum,
            "expected_spectrum": expected_spectrum(d),
            "spectrum_deviation": spectrum_deviation,
            "mc_trace": mc.op().trace().re,
            "closed_trace": closed.op().trace().re,
        }),
    ))
}

fn mean_divergence(cfg: &RunConfig, state: NamedState) -> Result<Outcome, CliError> {
    let d = cfg.dim;
    let rho = state.spec(d).resolve()?;
    let closed = divergence_isotropic_closed(d)?;
    let value = expectation(&rho, closed.op())?;
    let lower = lower_bound(d);
    let within = value >= lower - cfg.tolerance && value <= 1.0 + cfg.tolerance;
    Ok(outcome(
        within,
        json!({
            "value": value,
            "lower_bound": lower,
            "upper_bound": 1.0,
            "within_bounds": within,
        }),
    ))
}

fn singlet_demo(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = singlet_beamsplitter(cfg.samples, cfg.seed, cfg.shards)?;
    let passed = r.same_outcome_count == 0
        && r.anticorrelated_every_trial
        && (r.marginal_a_reflect - 0.5).abs() <= cfg.tolerance
        && (r.marginal_b_reflect - 0.5).abs() <= cfg.tolerance;
    Ok(outcome(passed, r))
}

fn qrng(cfg: &RunConfig, label: &str) -> Result<Outcome, CliError> {
    let state = polarization(label).ok_or_else(|| CliError::Usage(format!("unknown polarization {label}")))?;
    let out = qrng_generate(&state, &Povm::computational(2), cfg.samples, cfg.seed, cfg.shards)?;
    let passed = (out.ones_frequency - out.p_one).abs() <= cfg.tolerance;
    Ok(outcome(
        passed,
        json!({
            "n_bits": out.bits.len(),
            "bits_hex": out.hex(),
            "ones_frequency": out.ones_frequency,
            "p_one": out.p_one,
            "longest_run": out.longest_run,
        }),
    ))
}

/// Builds the outcome pairing named on the command line for a joint state.
pub fn resolve_remap(name: RemapName, spec: &JointStateSpec) -> Result<Option<Remap>, CliError> {
    let d = spec.dim_local;
    Ok(match name {
        RemapName::None => None,
        RemapName::Identity => Some(Remap::identity(d)),
        RemapName::Conjugate => Some(Remap::conjugation(d)),
        RemapName::Inversion => {
            if d != 2 {
                return Err(CliError::Usage(format!("the inversion remap needs --dim 2 (got {d})")));
            }
            Some(Remap::inversion())
        }
        RemapName::Matched => {
            let psi = spec.pure_state()?.ok_or_else(|| {
                CliError::Usage("the matched remap needs a pure maximally entangled state".into())
            })?;
            Some(correlation_remap(&psi)?)
        }
    })
}

fn predict(cfg: &RunConfig, name: NamedState, remap: RemapName) -> Result<Outcome, CliError> {
    let spec = name.spec(cfg.dim);
    let r = resolve_remap(remap, &spec)?;
    let povm = Povm::computational(2);
    let out = prediction_game(&spec, r.as_ref(), &povm, cfg.samples, cfg.seed, cfg.shards)?;
    let passed = (out.success_rate - out.exact_success_probability).abs() <= cfg.tolerance;
    Ok(outcome(passed, out))
}

fn volume_intervals(d: usize) -> usize {
    match d {
        2 | 3 => 400,
        _ => 160,
    }
}

fn sample(cfg: &RunConfig, sampler: SamplerId) -> Result<Outcome, CliError> {
    let d = cfg.dim;
    let batch = sample_haar(d, cfg.samples, cfg.seed, sampler, cfg.shards)?;
    let (first, second) = moment_check(&batch)?;
    let first_dev = first.max_abs_diff(&ComplexOperator::identity(d).scale(1.0 / d as f64));
    let second_dev = second.max_abs_diff(&second_moment_reference(d)?);
    let volume = if d <= QUADRATURE_MAX_DIM {
        Some(quadrature_volume(d, volume_intervals(d))?)
    } else {
        None
    };
    let volume_ok = volume.is_none_or(|v| (v - d as f64).abs() < VOLUME_TOL);
    let passed = first_dev <= cfg.tolerance && second_dev <= cfg.tolerance && volume_ok;
    let mut result = json!({
        "first_moment_deviation": first_dev,
        "second_moment_deviation": second_dev,
        "mean_first_amplitude_weight": first.get(0, 0).re,
    });
    if let Some(v) = volume {
        result["volume"] = json!(v);
        result["volume_deviation"] = json!((v - d as f64).abs());
    }
    Ok(outcome(passed, result))
}

fn remapped(
    cfg: &RunConfig,
    name: NamedState,
    remap: RemapName,
    sampler: SamplerId,
) -> Result<Outcome, CliError> {
    let d = cfg.dim;
    let spec = name.spec(d);
    let rho = spec.resolve()?;
    let r = resolve_remap(remap, &spec)?.unwrap_or_else(|| Remap::identity(d));
    let value = divergence_remapped_mc(&rho, &r, cfg.samples, cfg.seed, sampler, cfg.shards)?;
    let reference = expectation(&rho, &remapped_reference(&r)?)?;
    let deviation = (value - reference).abs();
    Ok(outcome(
        deviation <= cfg.tolerance,
        json!({
            "value": value,
            "reference": reference,
            "abs_deviation": deviation,
            "lower_bound": lower_bound(d),
        }),
    ))
}

fn bell_basis(cfg: &RunConfig) -> Outcome {
    let r = bell_basis_check();
    let worst = r
        .sym_deviation
        .max(r.antisym_deviation)
        .max(r.max_idempotence_defect);
    outcome(r.passed && worst <= cfg.tolerance, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;
    use qdiv::hilbert::PureState;
    use qdiv::scenarios::JointKind;

    fn config(args: &[&str]) -> Result<RunConfig, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("qdiv").chain(args.iter().copied())).unwrap();
        RunConfig::from_cli(&cli)
    }

    #[test]
    fn per_command_defaults() {
        let v = config(&["verify-decomposition"]).unwrap();
        assert_eq!((v.dim, v.samples, v.seed, v.tolerance), (2, 200_000, DEFAULT_SEED, 0.01));
        let m = config(&["mean-divergence"]).unwrap();
        assert_eq!((m.samples, m.tolerance), (100_000, BOUND_TOL));
        assert_eq!(config(&["bell-basis"]).unwrap().tolerance, EXACT_TOL);
        assert_eq!(config(&["predict"]).unwrap().tolerance, 0.02);
        let s = config(&["sample", "--tol", "0.5", "--samples", "9", "--shards", "3"]).unwrap();
        assert_eq!((s.tolerance, s.samples, s.shards), (0.5, 9, 3));
    }

    #[test]
    fn qubit_commands_reject_other_dimensions() {
        for cmd in ["singlet-demo", "qrng", "predict", "bell-basis"] {
            let err = config(&[cmd, "--dim", "3"]).unwrap_err();
            assert_eq!(err.exit_code(), crate::EXIT_USAGE);
        }
        assert!(config(&["sample", "--dim", "3"]).is_ok());
    }

    #[test]
    fn remap_resolution() {
        let singlet = NamedState::BellPsiMinus.spec(2);
        assert!(resolve_remap(RemapName::None, &singlet).unwrap().is_none());
        assert_eq!(resolve_remap(RemapName::Inversion, &singlet).unwrap(), Some(Remap::inversion()));
        let matched = resolve_remap(RemapName::Matched, &singlet).unwrap().unwrap();
        assert!(matched.conjugate());

        let qutrit = NamedState::MaxEntangled.spec(3);
        assert_eq!(resolve_remap(RemapName::Inversion, &qutrit).unwrap_err().exit_code(), crate::EXIT_USAGE);
        assert_eq!(resolve_remap(RemapName::Conjugate, &qutrit).unwrap(), Some(Remap::conjugation(3)));

        let product = JointStateSpec::new(JointKind::Product(PureState::basis(2, 0), PureState::basis(2, 1)), 2);
        assert_eq!(resolve_remap(RemapName::Matched, &product).unwrap_err().exit_code(), crate::EXIT_USAGE);
        let mixed = NamedState::MaximallyMixed.spec(2);
        assert_eq!(resolve_remap(RemapName::Matched, &mixed).unwrap_err().exit_code(), crate::EXIT_USAGE);
    }

    #[test]
    fn executed_reports_echo_their_config() {
        let cfg = config(&["remapped", "--dim", "3", "--spec", "max-entangled", "--remap", "matched", "--samples", "500"]).unwrap();
        let r = execute(&cfg).unwrap();
        assert!(r.passed);
        assert_eq!(r.config.spec, Some(NamedState::MaxEntangled));
        assert_eq!(r.config.remap, Some(RemapName::Matched));
        assert_eq!(r.config.sampler, Some(SamplerId::Angles));
        assert!(r.result["value"].as_f64().unwrap().abs() < 1e-12);
    }
}
