//! Shared CLI argument groups and their conversion into library types.

use std::fmt;

use clap::{Args, ValueEnum};

use crate::error::{Error, Result};
use crate::matgen::{Family, KAHAN_C, KAHAN_TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Kahan,
    Gap,
    DevilsStairs,
    Correlated,
    Condition,
    Heavytail,
    PrescribedSigma,
}

impl fmt::Display for FamilyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

/// Matrix family and parameters. Unset parameters take per-family defaults.
#[derive(Clone, Debug, Default, PartialEq, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Split index (gap position, rank-revealing split).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub stair_len: Option<usize>,
    #[arg(long)]
    pub jump: Option<f64>,
    /// Number of duplicated columns (correlated family).
    #[arg(long)]
    pub p: Option<usize>,
    /// Noise scale (correlated family).
    #[arg(long)]
    pub e: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Comma-separated singular values (prescribed-sigma family).
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
}

impl FamilyArgs {
    pub fn family_name(&self) -> Result<FamilyName> {
        self.family
            .ok_or_else(|| Error::invalid("--family is required for this command"))
    }

    /// The family at its configured size.
    pub fn family(&self) -> Result<Family> {
        let name = self.family_name()?;
        self.family_with_size(name, self.m)
    }

    /// The family with `m` (and the derived defaults) overridden by a sweep size.
    pub fn family_at(&self, name: FamilyName, m: usize) -> Result<Family> {
        self.family_with_size(name, Some(m))
    }

    fn family_with_size(&self, name: FamilyName, m: Option<usize>) -> Result<Family> {
        Ok(match name {
            FamilyName::Kahan => Family::Kahan {
                m: m.unwrap_or(20),
                c: self.c.unwrap_or(KAHAN_C),
                tau: self.tau.unwrap_or(KAHAN_TAU),
            },
            FamilyName::Gap => {
                let m = m.unwrap_or(128);
                Family::Gap {
                    m,
                    k: self.k.unwrap_or(m / 2),
                    gap: self.gap.unwrap_or(1e-10),
                }
            }
            FamilyName::DevilsStairs => Family::DevilsStairs {
                m: m.unwrap_or(128),
                stair_len: self.stair_len.unwrap_or(16),
                jump: self.jump.unwrap_or(0.1),
            },
            FamilyName::Correlated => {
                let m = m.unwrap_or(1000);
                Family::Correlated {
                    m,
                    n: self.n.unwrap_or(m + m / 2),
                    p: self.p.unwrap_or(10),
                    e: self.e.unwrap_or(1e-4),
                }
            }
            FamilyName::Condition => {
                let m = m.unwrap_or(200);
                Family::Condition {
                    m,
                    n: self.n.unwrap_or(m),
                    kappa: self.kappa.unwrap_or(1e6),
                }
            }
            FamilyName::Heavytail => {
                let m = m.unwrap_or(250);
                Family::HeavyTail {
                    m,
                    n: self.n.unwrap_or(m),
                }
            }
            FamilyName::PrescribedSigma => {
                let sigma = self
                    .sigma
                    .clone()
                    .ok_or_else(|| Error::invalid("prescribed-sigma needs --sigma"))?;
                let m = m.unwrap_or(sigma.len());
                Family::PrescribedSigma {
                    m,
                    n: self.n.unwrap_or(sigma.len()),
                    sigma,
                }
            }
        })
    }

    /// `--flag value` pairs for every parameter that is set.
    pub fn to_cli_args(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |flag: &str, value: Option<String>| {
            if let Some(v) = value {
                out.push(format!("--{flag}"));
                out.push(v);
            }
        };
        push("family", self.family.map(|f| f.to_string()));
        push("m", self.m.map(|v| v.to_string()));
        push("n", self.n.map(|v| v.to_string()));
        push("k", self.k.map(|v| v.to_string()));
        push("gap", self.gap.map(|v| v.to_string()));
        push("c", self.c.map(|v| v.to_string()));
        push("tau", self.tau.map(|v| v.to_string()));
        push("stair-len", self.stair_len.map(|v| v.to_string()));
        push("jump", self.jump.map(|v| v.to_string()));
        push("p", self.p.map(|v| v.to_string()));
        push("e", self.e.map(|v| v.to_string()));
        push("kappa", self.kappa.map(|v| v.to_string()));
        push(
            "sigma",
            self.sigma
                .as_ref()
                .map(|s| s.iter().map(f64::to_string).collect::<Vec<_>>().join(",")),
        );
        out
    }
}

/// Parses `a:b`, `a:b:step` (inclusive, step defaults to `a`) or `a,b,c`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::invalid(format!("bad size list '{text}' (use a:b[:step] or a,b,c)"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let sizes: Vec<usize> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() > 3 {
            return Err(bad());
        }
        let lo = num(parts[0])?;
        let hi = num(parts[1])?;
        let step = if parts.len() == 3 { num(parts[2])? } else { lo };
        if step == 0 || lo > hi {
            return Err(bad());
        }
        (lo..=hi).step_by(step).collect()
    } else {
        text.split(',').map(num).collect::<Result<_>>()?
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(bad());
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("20:100").unwrap(), vec![20, 40, 60, 80, 100]);
        assert_eq!(parse_sizes("10:30:5").unwrap(), vec![10, 15, 20, 25, 30]);
        assert_eq!(parse_sizes("8,16,4").unwrap(), vec![8, 16, 4]);
        for bad in ["", "0:10", "10:5", "1:2:0", "a,b", "1:2:3:4"] {
            assert!(parse_sizes(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn defaults_follow_size() {
        let args = FamilyArgs::default();
        assert_eq!(
            args.family_at(FamilyName::Gap, 64).unwrap(),
            Family::Gap { m: 64, k: 32, gap: 1e-10 }
        );
        assert_eq!(
            args.family_at(FamilyName::Kahan, 30).unwrap(),
            Family::Kahan { m: 30, c: 0.1, tau: 1e-7 }
        );
        assert!(args.family().is_err());
    }
}
