//! Experiment configuration types shared by the CLI and the library drivers.

use serde::Serialize;

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[value(name = "cox")]
    Cox,
    #[value(name = "weibull_aft", alias = "weibull-aft")]
    WeibullAft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[value(name = "twosided")]
    TwoSided,
    #[value(name = "scp")]
    Scp,
    #[value(name = "both")]
    Both,
}

impl Method {
    pub fn includes_twosided(self) -> bool {
        matches!(self, Method::TwoSided | Method::Both)
    }
    pub fn includes_scp(self) -> bool {
        matches!(self, Method::Scp | Method::Both)
    }
}

/// Synthetic-study configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    pub n: usize,
    pub n_test: usize,
    pub replications: usize,
    pub censoring_rate: f64,
    pub alpha: f64,
    pub alpha_split: f64,
    pub train_fraction: f64,
    pub model: ModelKind,
    pub method: Method,
    pub seed: u64,
}

impl SimulateConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_rate("censoring_rate", self.censoring_rate)?;
        check_rate("alpha", self.alpha)?;
        check_rate("alpha_split", self.alpha_split)?;
        check_rate("train_fraction", self.train_fraction)?;
        if self.replications == 0 {
            return Err(ConfigError("replications must be at least 1".into()));
        }
        if self.n < 4 {
            return Err(ConfigError(format!("n must be at least 4, got {}", self.n)));
        }
        if self.n_test == 0 {
            return Err(ConfigError("n_test must be positive".into()));
        }
        Ok(())
    }
}

/// CSV-dataset run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub alpha_split: f64,
    pub model: ModelKind,
    pub method: Method,
    pub splits: usize,
    /// Train / calibration / test fractions, summing to one.
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_rate("alpha", self.alpha)?;
        check_rate("alpha_split", self.alpha_split)?;
        if self.splits == 0 {
            return Err(ConfigError("splits must be at least 1".into()));
        }
        for (name, r) in ["train", "calibration", "test"].iter().zip(self.ratios) {
            if !(0.0 < r && r < 1.0) {
                return Err(ConfigError(format!(
                    "ratios: {name} fraction {r} not in (0,1)"
                )));
            }
        }
        let sum: f64 = self.ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError(format!("ratios must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

fn check_rate(name: &str, v: f64) -> Result<(), ConfigError> {
    if !(0.0 < v && v < 1.0) {
        return Err(ConfigError(format!("{name} {v} not in (0,1)")));
    }
    Ok(())
}

/// Parses a `a,b,c` fraction triple.
pub fn parse_ratios(s: &str) -> Result<[f64; 3], ConfigError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(ConfigError(format!(
            "ratios must be three comma-separated fractions, got {s:?}"
        )));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .trim()
            .parse::<f64>()
            .map_err(|_| ConfigError(format!("ratios: {p:?} is not a number")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SimulateConfig {
        SimulateConfig {
            n: 400,
            n_test: 100,
            replications: 10,
            censoring_rate: 0.3,
            alpha: 0.1,
            alpha_split: 0.5,
            train_fraction: 0.5,
            model: ModelKind::WeibullAft,
            method: Method::TwoSided,
            seed: 0,
        }
    }

    #[test]
    fn rejects_out_of_range_rates() {
        let mut c = base();
        assert!(c.validate().is_ok());
        c.alpha = 1.0;
        assert!(c.validate().unwrap_err().0.contains("alpha"));
        c = base();
        c.replications = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratios("0.4,0.4,0.2").unwrap(), [0.4, 0.4, 0.2]);
        assert!(parse_ratios("0.4,0.6").is_err());
        assert!(parse_ratios("a,b,c").is_err());
    }
}
