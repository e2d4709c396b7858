//! Grid search for parameter cells satisfying a condition set.
//!
//! ```toml
//! variant = "baseline"
//! target = "herd-kpos"
//! relative = true        # Q, q, eta given as fractions of their masses
//! p0 = ["1/2"]
//! pS = ["61/64"]
//! Q = ["0.98", "0.99"]
//! q = ["0.6", "0.7"]
//! k = ["1/100", "1/3"]
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::conditions::{check_conditions, NumericMode, TargetSet};
use super::AnalysisError;
use crate::config::{CongestionConfig, RunConfig};
use crate::decision::CongestionMode;
use crate::numeric::{format_rational, parse_rational, Rational};
use crate::signal_model::{ModelParams, SignalModel, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    #[serde(default = "baseline")]
    pub variant: Variant,
    pub target: TargetSet,
    /// When set, `Q` is read as `Q/pS`, `q` as `q/ps` (six signals) or
    /// `q/(1-pS)` (four signals), and `eta` as `eta/p_sigma`.
    #[serde(default)]
    pub relative: bool,
    #[serde(default)]
    pub mode: Option<CongestionMode>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    pub p0: Vec<String>,
    #[serde(rename = "pS")]
    pub strong_mass: Vec<String>,
    #[serde(rename = "Q")]
    pub strong_hit: Vec<String>,
    #[serde(rename = "q")]
    pub second_hit: Vec<String>,
    #[serde(default, rename = "ps")]
    pub medium_mass: Vec<String>,
    #[serde(default, rename = "p_sigma")]
    pub weak_mass: Vec<String>,
    #[serde(default, rename = "eta")]
    pub weak_hit: Vec<String>,
    pub k: Vec<String>,
}

fn baseline() -> Variant {
    Variant::Baseline4
}

fn default_horizon() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCell {
    pub params: ModelParams,
    pub k: String,
    /// Ready-to-run config for the cell.
    pub config: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub target: TargetSet,
    pub cells: usize,
    pub invalid: usize,
    pub evaluated: usize,
    pub satisfying: Vec<ScanCell>,
}

impl ScanGrid {
    pub fn from_toml_str(text: &str) -> Result<Self, AnalysisError> {
        toml::from_str(text).map_err(|e| AnalysisError::InvalidArgument(format!("grid: {e}")))
    }

    fn axes(&self) -> Result<Vec<Vec<Rational>>, AnalysisError> {
        let parse = |name: &str, v: &[String]| -> Result<Vec<Rational>, AnalysisError> {
            v.iter()
                .map(|s| parse_rational(s).map_err(|e| AnalysisError::InvalidArgument(format!("grid axis {name}: {e}"))))
                .collect()
        };
        let mut axes = vec![
            parse("p0", &self.p0)?,
            parse("pS", &self.strong_mass)?,
            parse("Q", &self.strong_hit)?,
            parse("q", &self.second_hit)?,
            parse("k", &self.k)?,
        ];
        if self.variant == Variant::Appendix6 {
            axes.push(parse("ps", &self.medium_mass)?);
            axes.push(parse("p_sigma", &self.weak_mass)?);
            axes.push(parse("eta", &self.weak_hit)?);
        }
        Ok(axes)
    }

    fn cell(&self, v: &[&Rational]) -> (ModelParams, Rational) {
        let (p0, ps_big, q_big, q, k) = (v[0], v[1], v[2], v[3], v[4]);
        let one = Rational::from_integer(1.into());
        match self.variant {
            Variant::Baseline4 => {
                let (q_abs, q_small) = if self.relative {
                    (q_big * ps_big, q * (&one - ps_big))
                } else {
                    (q_big.clone(), q.clone())
                };
                (ModelParams::baseline(p0.clone(), ps_big.clone(), q_abs, q_small), k.clone())
            }
            Variant::Appendix6 => {
                let (ps, psig, eta) = (v[5], v[6], v[7]);
                let (q_abs, q_med, eta_abs) = if self.relative {
                    (q_big * ps_big, q * ps, eta * psig)
                } else {
                    (q_big.clone(), q.clone(), eta.clone())
                };
                (
                    ModelParams::appendix(p0.clone(), ps_big.clone(), ps.clone(), psig.clone(), q_abs, q_med, eta_abs),
                    k.clone(),
                )
            }
        }
    }
}

fn cartesian(axes: &[Vec<Rational>]) -> Vec<Vec<&Rational>> {
    let mut out: Vec<Vec<&Rational>> = vec![Vec::new()];
    for axis in axes {
        out = out.into_iter().flat_map(|prefix| axis.iter().map(move |v| {
            let mut p = prefix.clone();
            p.push(v);
            p
        })).collect();
    }
    out
}

pub fn scan_parameters(grid: &ScanGrid) -> Result<ScanReport, AnalysisError> {
    if grid.target.variant() != grid.variant {
        return Err(AnalysisError::InvalidArgument(format!(
            "target {:?} needs the {:?} signal model",
            grid.target,
            grid.target.variant()
        )));
    }
    let axes = grid.axes()?;
    let cells = cartesian(&axes);
    if cells.is_empty() || axes.iter().any(Vec::is_empty) {
        return Err(AnalysisError::EmptyGrid);
    }
    let mode = grid.mode.unwrap_or(match grid.variant {
        Variant::Baseline4 => CongestionMode::Differ,
        Variant::Appendix6 => CongestionMode::Conform,
    });
    let outcomes: Vec<Option<Option<ScanCell>>> = cells
        .par_iter()
        .map(|v| {
            let (params, k) = grid.cell(v);
            let model = SignalModel::new(params.clone()).ok()?;
            let congestion = CongestionConfig { k: k.clone(), mode, ..CongestionConfig::default() };
            congestion.spec().ok()?;
            let report = check_conditions(&model, &k, grid.horizon, NumericMode::Exact).ok()?;
            Some(grid.target.satisfied_by(&report).then(|| {
                let mut config = RunConfig::new(params.clone(), congestion);
                config.run.horizon = Some(grid.horizon);
                ScanCell { params, k: format_rational(&k), config: config.to_toml_string() }
            }))
        })
        .collect();
    let invalid = outcomes.iter().filter(|o| o.is_none()).count();
    Ok(ScanReport {
        target: grid.target,
        cells: cells.len(),
        invalid,
        evaluated: cells.len() - invalid,
        satisfying: outcomes.into_iter().flatten().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(k: &[&str]) -> ScanGrid {
        ScanGrid {
            variant: Variant::Baseline4,
            target: TargetSet::HerdKpos,
            relative: false,
            mode: None,
            horizon: 6,
            p0: vec!["1/2".into()],
            strong_mass: vec!["1/16".into()],
            strong_hit: vec!["9/256".into(), "1/16".into()],
            second_hit: vec!["33/64".into()],
            medium_mass: vec![],
            weak_mass: vec![],
            weak_hit: vec![],
            k: k.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn finds_witness_and_counts_invalid() {
        let r = scan_parameters(&grid(&["1/50"])).unwrap();
        assert_eq!(r.cells, 2);
        assert_eq!(r.invalid, 1);
        assert_eq!(r.satisfying.len(), 1);
        let back = RunConfig::from_toml_str(&r.satisfying[0].config).unwrap();
        assert!(back.model().is_ok());
    }

    #[test]
    fn zero_cost_grid_has_no_positive_cost_cells() {
        let r = scan_parameters(&grid(&["0"])).unwrap();
        assert!(r.satisfying.is_empty());
    }

    #[test]
    fn empty_axis_is_an_error() {
        assert_eq!(scan_parameters(&grid(&[])), Err(AnalysisError::EmptyGrid));
    }
}
