//! Input-state mini-language.
//!
//! ```text
//! vacuum
//! fock <n>
//! coherent <alpha>
//! cat <alpha0> <+|->
//! file <path>          newline-separated `re,im` amplitudes
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kerrcdo_core::fock::{cat_state, coherent_state, fock_state};
use kerrcdo_core::{Complex64, FockDim, ModeState, Sign};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::value::Cplx;
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Vacuum,
    Fock(usize),
    Coherent(Cplx),
    Cat(Cplx, Sign),
    File(PathBuf),
}

pub fn parse_sign(s: &str) -> Option<Sign> {
    match s {
        "+" | "plus" | "even" => Some(Sign::Plus),
        "-" | "minus" | "odd" => Some(Sign::Minus),
        _ => None,
    }
}

pub fn sign_symbol(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

impl FromStr for StateSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| CliError::Config(format!("state `{s}`: {why}"));
        let trimmed = s.trim();
        if let Some(path) = trimmed.strip_prefix("file ") {
            return Ok(StateSpec::File(PathBuf::from(path.trim())));
        }
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        match words.as_slice() {
            ["vacuum"] => Ok(StateSpec::Vacuum),
            ["fock", n] => n.parse().map(StateSpec::Fock).map_err(|_| bad("photon number must be a non-negative integer")),
            ["coherent", a] => a.parse().map(StateSpec::Coherent).map_err(|e| bad(&e.to_string())),
            ["cat", a, sign] => {
                let a = a.parse().map_err(|e: crate::value::ParseComplexError| bad(&e.to_string()))?;
                let sign = parse_sign(sign).ok_or_else(|| bad("cat sign must be + or -"))?;
                Ok(StateSpec::Cat(a, sign))
            }
            _ => Err(bad("expected vacuum | fock <n> | coherent <alpha> | cat <alpha0> <+|-> | file <path>")),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Vacuum => write!(f, "vacuum"),
            StateSpec::Fock(n) => write!(f, "fock {n}"),
            StateSpec::Coherent(a) => write!(f, "coherent {a}"),
            StateSpec::Cat(a, s) => write!(f, "cat {a} {}", sign_symbol(*s)),
            StateSpec::File(p) => write!(f, "file {}", p.display()),
        }
    }
}

impl Serialize for StateSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StateSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn read_amplitudes(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (re, im) = l
                .split_once(',')
                .ok_or_else(|| CliError::Config(format!("{}: expected `re,im`, got `{l}`", path.display())))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("{}: bad number in `{l}`", path.display())))
            };
            Ok(Complex64::new(parse(re)?, parse(im)?))
        })
        .collect()
}

impl StateSpec {
    /// Smallest dimension that holds the state and passes its displacement guard.
    pub fn min_dim(&self) -> Result<usize, CliError> {
        Ok(match self {
            StateSpec::Vacuum => 2,
            StateSpec::Fock(n) => (n + 1).max(2),
            StateSpec::Coherent(a) | StateSpec::Cat(a, _) => FockDim::for_amplitude(a.0.norm()).get(),
            StateSpec::File(p) => read_amplitudes(p)?.len().max(2),
        })
    }

    /// Build the normalized state; file amplitudes are normalized and
    /// zero-padded to `dim`.
    pub fn build(&self, dim: FockDim) -> Result<ModeState, CliError> {
        Ok(match self {
            StateSpec::Vacuum => fock_state(0, dim)?,
            StateSpec::Fock(n) => fock_state(*n, dim)?,
            StateSpec::Coherent(a) => coherent_state(a.0, dim)?,
            StateSpec::Cat(a, s) => cat_state(a.0, *s, dim)?,
            StateSpec::File(p) => {
                let mut amps = read_amplitudes(p)?;
                if amps.len() > dim.get() {
                    return Err(CliError::Config(format!(
                        "{} holds {} amplitudes, more than dim_a = {}",
                        p.display(),
                        amps.len(),
                        dim.get()
                    )));
                }
                amps.resize(dim.get(), Complex64::new(0.0, 0.0));
                ModeState::from_amplitudes(amps)?.normalize()?
            }
        })
    }
}
