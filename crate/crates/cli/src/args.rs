use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdiv::haar::SamplerId;
use qdiv::scenarios::NamedState;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "qdiv", version, about = "Divergence of continuous quantum measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

/// Flags shared by every command; accepted before or after the command name.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Local Hilbert space dimension D.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..=16))]
    pub dim: Option<u64>,

    /// Number of Monte Carlo samples or trials.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=100_000_000))]
    pub samples: Option<u64>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Pass/fail tolerance.
    #[arg(long, global = true, value_parser = parse_tolerance)]
    pub tol: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    pub shards: u64,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Compare the Monte Carlo and closed-form isotropic divergence operators.
    VerifyDecomposition {
        #[arg(long, value_parser = parse_sampler, default_value = "angles")]
        sampler: SamplerId,
    },
    /// Mean divergence of a named joint state.
    MeanDivergence {
        #[arg(long, value_parser = parse_named_state, default_value = "bell_psi_minus")]
        state: NamedState,
    },
    /// Singlet pairs at two ±45° polarizing beamsplitters.
    SingletDemo,
    /// Random bits from H/V measurements of a polarization state.
    Qrng {
        #[arg(long, value_parser = parse_polarization, default_value = "plus45")]
        state: Polarization,
    },
    /// Adversary measuring B predicts A's outcome.
    Predict {
        #[arg(long, value_parser = parse_named_state, default_value = "bell_psi_minus")]
        spec: NamedState,
        #[arg(long, value_parser = parse_remap, default_value = "inversion")]
        remap: RemapName,
    },
    /// Haar sampler moments and volume normalization.
    Sample {
        #[arg(long, value_parser = parse_sampler, default_value = "angles")]
        sampler: SamplerId,
    },
    /// Mean of the divergence with re-paired outcomes.
    Remapped {
        #[arg(long, value_parser = parse_named_state, default_value = "bell_psi_minus")]
        spec: NamedState,
        #[arg(long, value_parser = parse_remap, default_value = "inversion")]
        remap: RemapName,
        #[arg(long, value_parser = parse_sampler, default_value = "angles")]
        sampler: SamplerId,
    },
    /// Bell projectors against the symmetric and antisymmetric projectors.
    BellBasis,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyDecomposition { .. } => "verify-decomposition",
            Command::MeanDivergence { .. } => "mean-divergence",
            Command::SingletDemo => "singlet-demo",
            Command::Qrng { .. } => "qrng",
            Command::Predict { .. } => "predict",
            Command::Sample { .. } => "sample",
            Command::Remapped { .. } => "remapped",
            Command::BellBasis => "bell-basis",
        }
    }
}

pub const COMMANDS: [&str; 8] = [
    "verify-decomposition",
    "mean-divergence",
    "singlet-demo",
    "qrng",
    "predict",
    "sample",
    "remapped",
    "bell-basis",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// Outcome pairing selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemapName {
    Identity,
    Conjugate,
    /// Orthogonal complement on a qubit.
    Inversion,
    /// Built from the joint state, which must be maximally entangled.
    Matched,
    None,
}

impl RemapName {
    pub const ALL: [RemapName; 5] = [
        RemapName::Identity,
        RemapName::Conjugate,
        RemapName::Inversion,
        RemapName::Matched,
        RemapName::None,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RemapName::Identity => "identity",
            RemapName::Conjugate => "conjugate",
            RemapName::Inversion => "inversion",
            RemapName::Matched => "matched",
            RemapName::None => "none",
        }
    }
}

impl fmt::Display for RemapName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} '{value}' (expected one of: {expected})")]
pub struct UnknownName {
    pub kind: &'static str,
    pub value: String,
    pub expected: String,
}

impl FromStr for RemapName {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RemapName::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| UnknownName {
                kind: "remap",
                value: s.to_string(),
                expected: RemapName::ALL.map(|r| r.as_str()).join(", "),
            })
    }
}

/// Single-photon polarization states for `qrng`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    H,
    V,
    Plus45,
    Minus45,
    Right,
}

impl Polarization {
    pub const ALL: [Polarization; 5] = [
        Polarization::H,
        Polarization::V,
        Polarization::Plus45,
        Polarization::Minus45,
        Polarization::Right,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Polarization::H => "h",
            Polarization::V => "v",
            Polarization::Plus45 => "plus45",
            Polarization::Minus45 => "minus45",
            Polarization::Right => "right",
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarization {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Polarization::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| UnknownName {
                kind: "polarization",
                value: s.to_string(),
                expected: Polarization::ALL.map(|p| p.as_str()).join(", "),
            })
    }
}

pub fn parse_tolerance(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(format!("tolerance must be a positive finite number, got {s}"))
    }
}

pub fn parse_named_state(s: &str) -> Result<NamedState, String> {
    s.parse::<NamedState>().map_err(|e| e.to_string())
}

pub fn parse_remap(s: &str) -> Result<RemapName, String> {
    s.parse::<RemapName>().map_err(|e| e.to_string())
}

pub fn parse_sampler(s: &str) -> Result<SamplerId, String> {
    s.parse::<SamplerId>().map_err(|e| e.to_string())
}

pub fn parse_polarization(s: &str) -> Result<Polarization, String> {
    s.parse::<Polarization>().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("qdiv").chain(args.iter().copied()))
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_go_anywhere() {
        let a = parse(&["--dim", "3", "verify-decomposition", "--seed", "9"]).unwrap();
        assert_eq!(a.common.dim, Some(3));
        assert_eq!(a.common.seed, Some(9));
        assert_eq!(a.command.name(), "verify-decomposition");
    }

    #[test]
    fn rejects_bad_numbers() {
        assert!(parse(&["sample", "--dim", "1"]).is_err());
        assert!(parse(&["sample", "--samples", "0"]).is_err());
        assert!(parse(&["sample", "--tol", "0"]).is_err());
        assert!(parse(&["sample", "--tol", "nan"]).is_err());
        assert!(parse(&["sample", "--shards", "0"]).is_err());
        assert!(parse(&["sample", "--seed", "-1"]).is_err());
    }

    #[test]
    fn seed_accepts_full_u64_range() {
        let a = parse(&["sample", "--seed", "18446744073709551615"]).unwrap();
        assert_eq!(a.common.seed, Some(u64::MAX));
    }

    #[test]
    fn enum_flags() {
        let a = parse(&["predict", "--spec", "bell-psi-minus", "--remap", "matched"]).unwrap();
        match a.command {
            Command::Predict { spec, remap } => {
                assert_eq!(spec, NamedState::BellPsiMinus);
                assert_eq!(remap, RemapName::Matched);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse(&["predict", "--remap", "sideways"]).is_err());
        assert!(parse(&["qrng", "--state", "plus45"]).is_ok());
        assert!(parse(&["qrng", "--state", "bell_psi_minus"]).is_err());
    }

    #[test]
    fn names_round_trip() {
        for r in RemapName::ALL {
            assert_eq!(r.as_str().parse::<RemapName>().unwrap(), r);
        }
        for p in Polarization::ALL {
            assert_eq!(p.as_str().parse::<Polarization>().unwrap(), p);
        }
    }

    #[test]
    fn command_names_match_subcommands() {
        use clap::CommandFactory;
        let cmd = Cli::command();
        let names: Vec<_> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
        assert_eq!(names, COMMANDS);
    }
}
