use std::path::PathBuf;

use bblab_core::convex::SolveConfig;
use bblab_core::strip::LineGrid;
use bblab_core::{Exec, SpaceNorm};
use clap::Args;
use serde::Serialize;

/// Flags shared by every experiment.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Torus dimension.
    #[arg(long = "d", default_value_t = 2)]
    pub d: usize,
    /// Bandlimit: modes `|n_i| ≤ N`.
    #[arg(long = "N", default_value_t = 8)]
    pub n: usize,
    /// Grid points per mode for grid-evaluated norms.
    #[arg(long, default_value_t = 2)]
    pub oversample: usize,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Dyadic range `|ν| ≤ M`.
    #[arg(long = "M", default_value_t = 8)]
    pub m: u32,
    /// Gaussian factor of the strip witness.
    #[arg(long, default_value_t = 0.125)]
    pub delta: f64,
    /// Half-width of the line grid.
    #[arg(long = "T", default_value_t = 16.0)]
    pub t_half: f64,
    /// Step of the line grid.
    #[arg(long = "h", default_value_t = 0.125)]
    pub h: f64,
    /// Relative duality-gap tolerance (experiment default when omitted).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Plot data as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Run the data-parallel loops sequentially.
    #[arg(long)]
    pub sequential: bool,
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub oversample: usize,
    pub theta: f64,
    pub q: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub delta: f64,
    #[serde(rename = "T")]
    pub t_half: f64,
    pub h: f64,
    pub tol: f64,
    pub seed: u64,
    pub output: Option<String>,
    pub exec: &'static str,
}

impl ExperimentConfig {
    pub fn resolve(tag: &str, a: &CommonArgs, default_tol: f64) -> Result<Self, String> {
        let cfg = ExperimentConfig {
            experiment: tag.to_string(),
            d: a.d,
            n: a.n,
            oversample: a.oversample,
            theta: a.theta,
            q: a.q,
            m: a.m,
            delta: a.delta,
            t_half: a.t_half,
            h: a.h,
            tol: a.tol.unwrap_or(default_tol),
            seed: a.seed,
            output: a.output.as_ref().map(|p| p.display().to_string()),
            exec: if a.sequential { "sequential" } else { "parallel" },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if self.d == 0 || self.n == 0 || self.oversample == 0 || self.m == 0 {
            return Err("d, N, oversample and M must be positive".into());
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(format!("theta = {} not in (0,1)", self.theta));
        }
        if !(self.q >= 1.0) || self.q.is_infinite() {
            return Err(format!("q = {} not in [1,∞)", self.q));
        }
        for (name, v) in [("delta", self.delta), ("T", self.t_half), ("h", self.h), ("tol", self.tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} = {v} must be positive"));
            }
        }
        Ok(())
    }

    pub fn exec(&self) -> Exec {
        if self.exec == "sequential" {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    pub fn solve(&self) -> SolveConfig {
        SolveConfig {
            tol: self.tol,
            oversample: self.oversample,
            exec: self.exec(),
            ..Default::default()
        }
    }

    pub fn grid(&self) -> LineGrid {
        LineGrid {
            half_width: self.t_half,
            step: self.h,
        }
    }
}

/// `linf`, `lp:P`, `hs:S`, `besov:SIGMA:Q` or `s1linf`.
pub fn parse_norm(s: &str) -> Result<SpaceNorm, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| format!("bad number `{x}` in norm `{s}`"));
    let n = match parts.as_slice() {
        ["linf"] => SpaceNorm::Lp(f64::INFINITY),
        ["s1linf"] => SpaceNorm::S1Linf,
        ["lp", p] => SpaceNorm::Lp(num(p)?),
        ["hs", o] => SpaceNorm::Hs(num(o)?),
        ["besov", sigma, q] => SpaceNorm::BesovLP {
            sigma: num(sigma)?,
            q: num(q)?,
        },
        _ => return Err(format!("unknown norm `{s}`")),
    };
    n.validate().map_err(|e| e.to_string())?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_parse() {
        assert_eq!(parse_norm("hs:1.5").unwrap(), SpaceNorm::Hs(1.5));
        assert_eq!(parse_norm("linf").unwrap(), SpaceNorm::Lp(f64::INFINITY));
        assert!(parse_norm("lp:0.5").is_err());
        assert!(parse_norm("sobolev").is_err());
    }
}
