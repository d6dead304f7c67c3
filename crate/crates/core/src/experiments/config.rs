//! Experiment configuration and the textual specs for `B` and `Σ`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{eigh, schatten_norm, ScalarFunction, SchattenP, SymMat};
use crate::sampling::RngStream;

/// Stream id reserved for drawing random spec matrices.
const SPEC_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    BiasScaling,
    Coverage,
    OpNorm,
    QuadForm,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::BiasScaling => "bias_scaling",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::OpNorm => "opnorm",
            ExperimentKind::QuadForm => "quadform",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bias_scaling" => Ok(ExperimentKind::BiasScaling),
            "coverage" => Ok(ExperimentKind::Coverage),
            "opnorm" => Ok(ExperimentKind::OpNorm),
            "quadform" => Ok(ExperimentKind::QuadForm),
            other => Err(Error::invalid(format!("unknown experiment {other:?}"))),
        }
    }
}

/// Test matrix `B` (or `A` for the quadratic-form study).
///
/// Syntax: `identity` (`I/d`), `rank1:I` (`e_I e_Iᵀ`), `vec:u1,u2,...`
/// (`uuᵀ/‖u‖²`), `random` (random symmetric, nuclear-normalized when used
/// as `B`), `zero` (only valid without normalization).
#[derive(Debug, Clone, PartialEq)]
pub enum BSpec {
    IdentityNormalized,
    Zero,
    RankOne(usize),
    RankOneVec(Vec<f64>),
    Random,
}

impl BSpec {
    /// Builds the matrix for dimension `d`. With `normalize`, the result is
    /// rescaled to nuclear norm 1 and the factor applied is returned.
    pub fn build(&self, d: usize, normalize: bool, seed: u64) -> Result<(SymMat<f64>, f64)> {
        let raw = match self {
            BSpec::IdentityNormalized => {
                if normalize {
                    SymMat::scaled_identity(d, 1.0 / d as f64)
                } else {
                    SymMat::identity(d)
                }
            }
            BSpec::Zero => SymMat::zeros(d),
            BSpec::RankOne(i) => {
                if *i >= d {
                    return Err(Error::invalid(format!(
                        "rank1 index {i} out of range for d = {d}"
                    )));
                }
                SymMat::unit_rank_one(d, *i)
            }
            BSpec::RankOneVec(u) => {
                if u.len() != d {
                    return Err(Error::DimMismatch {
                        expected: d,
                        got: u.len(),
                    });
                }
                let norm2: f64 = u.iter().map(|x| x * x).sum();
                if norm2 == 0.0 {
                    return Err(Error::ZeroMatrix);
                }
                SymMat::outer(u).scale(1.0 / norm2)
            }
            BSpec::Random => {
                let mut rng = RngStream::new(seed, SPEC_STREAM).substream(2 * d as u64);
                random_symmetric(d, &mut rng)
            }
        };
        if !normalize {
            return Ok((raw, 1.0));
        }
        let nuclear = schatten_norm(&raw, SchattenP::One)?;
        if nuclear == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        if (nuclear - 1.0).abs() <= 1e-15 {
            return Ok((raw, 1.0));
        }
        let factor = 1.0 / nuclear;
        Ok((raw.scale(factor), factor))
    }
}

impl fmt::Display for BSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BSpec::IdentityNormalized => write!(f, "identity"),
            BSpec::Zero => write!(f, "zero"),
            BSpec::RankOne(i) => write!(f, "rank1:{i}"),
            BSpec::RankOneVec(u) => write!(f, "vec:{}", join(u)),
            BSpec::Random => write!(f, "random"),
        }
    }
}

impl FromStr for BSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            None if s == "identity" => Ok(BSpec::IdentityNormalized),
            None if s == "random" => Ok(BSpec::Random),
            None if s == "zero" => Ok(BSpec::Zero),
            Some(("rank1", i)) => i
                .trim()
                .parse()
                .map(BSpec::RankOne)
                .map_err(|_| Error::invalid(format!("bad rank1 index {i:?}"))),
            Some(("vec", list)) => Ok(BSpec::RankOneVec(parse_floats(list)?)),
            _ => Err(Error::invalid(format!("unknown B spec {s:?}"))),
        }
    }
}

/// Covariance spec.
///
/// Syntax: `identity`, `diag:v1,v2,...`, `spiked:BASE:s1,s2,...` (leading
/// spikes then `BASE` on the remaining diagonal), `linspace:LO,HI`
/// (equispaced diagonal), `random:LO,HI` (random rotation of an equispaced
/// spectrum in `[LO, HI]`).
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSpec {
    Identity,
    Diag(Vec<f64>),
    Spiked { base: f64, spikes: Vec<f64> },
    Linspace { lo: f64, hi: f64 },
    Random { lo: f64, hi: f64 },
}

fn linspace(lo: f64, hi: f64, d: usize) -> Vec<f64> {
    if d == 1 {
        return vec![lo];
    }
    (0..d)
        .map(|i| lo + (hi - lo) * i as f64 / (d - 1) as f64)
        .collect()
}

impl SigmaSpec {
    pub fn build(&self, d: usize, seed: u64) -> Result<SymMat<f64>> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let m = match self {
            SigmaSpec::Identity => SymMat::identity(d),
            SigmaSpec::Diag(v) => {
                if v.len() != d {
                    return Err(Error::DimMismatch {
                        expected: d,
                        got: v.len(),
                    });
                }
                SymMat::from_diag(v)
            }
            SigmaSpec::Spiked { base, spikes } => {
                if spikes.len() > d {
                    return Err(Error::invalid(format!(
                        "{} spikes do not fit in dimension {d}",
                        spikes.len()
                    )));
                }
                let mut diag = spikes.clone();
                diag.resize(d, *base);
                SymMat::from_diag(&diag)
            }
            SigmaSpec::Linspace { lo, hi } => SymMat::from_diag(&linspace(*lo, *hi, d)),
            SigmaSpec::Random { lo, hi } => {
                let mut rng = RngStream::new(seed, SPEC_STREAM).substream(2 * d as u64 + 1);
                let basis = eigh(&random_symmetric(d, &mut rng))?;
                basis.recompose_with(&linspace(*lo, *hi, d))
            }
        };
        if m.diag().iter().any(|&x| x < 0.0) {
            return Err(Error::NotPsd {
                min_eigenvalue: m.diag().iter().copied().fold(f64::INFINITY, f64::min),
            });
        }
        Ok(m)
    }
}

impl fmt::Display for SigmaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaSpec::Identity => write!(f, "identity"),
            SigmaSpec::Diag(v) => write!(f, "diag:{}", join(v)),
            SigmaSpec::Spiked { base, spikes } => write!(f, "spiked:{base}:{}", join(spikes)),
            SigmaSpec::Linspace { lo, hi } => write!(f, "linspace:{lo},{hi}"),
            SigmaSpec::Random { lo, hi } => write!(f, "random:{lo},{hi}"),
        }
    }
}

impl FromStr for SigmaSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let pair = |list: &str| -> Result<(f64, f64)> {
            match parse_floats(list)?.as_slice() {
                &[lo, hi] if lo > 0.0 && lo <= hi => Ok((lo, hi)),
                _ => Err(Error::invalid(format!("expected 0 < LO <= HI in {s:?}"))),
            }
        };
        match s.split_once(':') {
            None if s == "identity" => Ok(SigmaSpec::Identity),
            Some(("diag", list)) => Ok(SigmaSpec::Diag(parse_floats(list)?)),
            Some(("spiked", rest)) => {
                let (base, spikes) = rest.split_once(':').ok_or_else(|| {
                    Error::invalid(format!("expected spiked:BASE:S1,... in {s:?}"))
                })?;
                let base = base
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad spiked base {base:?}")))?;
                Ok(SigmaSpec::Spiked {
                    base,
                    spikes: parse_floats(spikes)?,
                })
            }
            Some(("linspace", list)) => pair(list).map(|(lo, hi)| SigmaSpec::Linspace { lo, hi }),
            Some(("random", list)) => pair(list).map(|(lo, hi)| SigmaSpec::Random { lo, hi }),
            _ => Err(Error::invalid(format!("unknown sigma spec {s:?}"))),
        }
    }
}

/// Full parameterization of one simulation study.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub d: Vec<usize>,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub f: ScalarFunction<f64>,
    pub b: BSpec,
    pub sigma: SigmaSpec,
    /// Outer Monte Carlo replicates (datasets per cell, or draws per side
    /// for the quadratic-form study).
    pub m: usize,
    /// Bootstrap chains per estimate.
    pub chains: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let nonempty = |name: &str, v: &[usize]| {
            if v.is_empty() || v.contains(&0) {
                Err(Error::invalid(format!(
                    "{name} must be a nonempty list of positive integers"
                )))
            } else {
                Ok(())
            }
        };
        nonempty("d", &self.d)?;
        nonempty("n", &self.n)?;
        if self.k.is_empty() {
            return Err(Error::invalid("k must be a nonempty list"));
        }
        if self.m == 0 || self.chains == 0 {
            return Err(Error::invalid("M and N must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::BadAlpha(self.alpha));
        }
        Ok(())
    }

    /// `key=value` pairs in the canonical key order, as written to output
    /// metadata and accepted back by the config parser.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[usize]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        vec![
            ("experiment", self.experiment.to_string()),
            ("d", list(&self.d)),
            ("n", list(&self.n)),
            ("k", list(&self.k)),
            ("fn", self.f.to_string()),
            ("B", self.b.to_string()),
            ("sigma", self.sigma.to_string()),
            ("M", self.m.to_string()),
            ("N", self.chains.to_string()),
            ("alpha", self.alpha.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_floats(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|t| {
            let x: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad number {t:?}")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(Error::invalid(format!("non-finite number {t:?}")))
            }
        })
        .collect()
}

/// Symmetric matrix with i.i.d. `N(0, 1)` upper-triangle entries.
fn random_symmetric(d: usize, rng: &mut RngStream) -> SymMat<f64> {
    SymMat::from_upper_fn(d, |_, _| rng.standard_normal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigvalsh;

    #[test]
    fn b_specs_are_nuclear_normalized() {
        for spec in ["identity", "rank1:2", "vec:1,2,-2,0", "random"] {
            let b: BSpec = spec.parse().unwrap();
            assert_eq!(b.to_string(), spec);
            let (m, _) = b.build(4, true, 7).unwrap();
            let nuc = schatten_norm(&m, SchattenP::One).unwrap();
            assert!((nuc - 1.0).abs() < 1e-12, "{spec}: {nuc}");
        }
        let (m, factor) = BSpec::IdentityNormalized.build(5, true, 0).unwrap();
        assert_eq!(m, SymMat::scaled_identity(5, 0.2));
        assert_eq!(factor, 1.0);
    }

    #[test]
    fn b_spec_errors() {
        assert!(BSpec::RankOne(3).build(3, true, 0).is_err());
        assert_eq!(BSpec::Zero.build(3, true, 0), Err(Error::ZeroMatrix));
        assert!(BSpec::RankOneVec(vec![0.0, 0.0]).build(2, true, 0).is_err());
        assert!("rank1:x".parse::<BSpec>().is_err());
        assert!("ones".parse::<BSpec>().is_err());
    }

    #[test]
    fn sigma_specs() {
        let s: SigmaSpec = "spiked:1:2".parse().unwrap();
        assert_eq!(
            s.build(4, 0).unwrap(),
            SymMat::from_diag(&[2.0, 1.0, 1.0, 1.0])
        );
        let s: SigmaSpec = "linspace:1,2".parse().unwrap();
        assert_eq!(s.build(3, 0).unwrap(), SymMat::from_diag(&[1.0, 1.5, 2.0]));
        let s: SigmaSpec = "diag:1,2,3".parse().unwrap();
        assert!(s.build(2, 0).is_err());
        let s: SigmaSpec = "random:0.5,2".parse().unwrap();
        let m = s.build(5, 3).unwrap();
        let eigs = eigvalsh(&m).unwrap();
        assert!((eigs[0] - 0.5).abs() < 1e-12 && (eigs[4] - 2.0).abs() < 1e-12);
        assert_eq!(m, s.build(5, 3).unwrap());
        assert_ne!(m, s.build(5, 4).unwrap());
        for spec in [
            "identity",
            "diag:1,2.5",
            "spiked:1:3,2",
            "linspace:1,2",
            "random:0.5,2",
        ] {
            assert_eq!(spec.parse::<SigmaSpec>().unwrap().to_string(), spec);
        }
        assert!("random:2,1".parse::<SigmaSpec>().is_err());
    }
}
